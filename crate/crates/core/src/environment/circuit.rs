//! Combinational NAND circuits with two named sources and two named sinks.

use std::collections::BTreeMap;

use super::compile::{analyze, open_outputs, stateless_machine, Compiled, PortLabel, Role};
use super::CompileError;
use crate::language::{Alphabet, AlphabetBuilder, Cmp, Concept, Constraint, Direction, Rule, RuleCategory, RuleSet};
use crate::system::{TimeScale, Value};
use crate::verification::{Location, Requirement, RequirementSet, Scenario};

pub const SOURCES: [&str; 2] = ["A", "B"];
pub const SINKS: [&str; 2] = ["S", "C"];
pub const GATE: &str = "NAND";

/// Most open inputs a compiled circuit may expose.
pub const MAX_OPEN_INPUTS: usize = 12;

pub fn alphabet() -> Alphabet {
    let mut b = AlphabetBuilder::new().connective("wire");
    for s in SOURCES {
        b = b.component(s, &[("o", Direction::Out, false)], &[]);
    }
    for s in SINKS {
        b = b.component(s, &[("i", Direction::In, true)], &[]);
    }
    b.component(
        GATE,
        &[
            ("x", Direction::In, false),
            ("y", Direction::In, false),
            ("z", Direction::Out, false),
        ],
        &[],
    )
    .build()
    .expect("circuit alphabet")
}

/// Single drivers, no loops, at most one of each terminal, and sinks only
/// alongside both sources.
pub fn rules() -> RuleSet {
    let mut rules = vec![
        Rule::new("single-driver", RuleCategory::Formal, Constraint::MaxFanIn(1)),
        Rule::new("acyclic", RuleCategory::Formal, Constraint::Acyclic),
    ];
    for t in SOURCES.iter().chain(&SINKS) {
        rules.push(Rule::new(
            &format!("unique-{t}"),
            RuleCategory::Formal,
            Constraint::count(t, Cmp::Le, 1),
        ));
    }
    rules.push(
        Rule::new(
            "terminals-need-sources",
            RuleCategory::Conceptual,
            Constraint::All(SOURCES.iter().map(|s| Constraint::count(s, Cmp::Ge, 1)).collect()),
        )
        .when(Constraint::Any(SINKS.iter().map(|s| Constraint::count(s, Cmp::Ge, 1)).collect())),
    );
    RuleSet::new(alphabet(), rules).expect("circuit rules")
}

/// Eight rows: sum and carry of a half adder for each input pair.
pub fn half_adder_requirements() -> RequirementSet {
    let mut reqs = Vec::new();
    for a in 0..2i64 {
        for b in 0..2i64 {
            let inputs: BTreeMap<String, i64> = [("A".to_string(), a), ("B".to_string(), b)].into();
            for (sink, bit) in [("S", a ^ b), ("C", a & b)] {
                reqs.push(Requirement::new(
                    &format!("{}-{a}{b}", sink.to_lowercase()),
                    Scenario::TruthRow {
                        inputs: inputs.clone(),
                        outputs: [(sink.to_string(), bit)].into(),
                    },
                    1.0,
                ));
            }
        }
    }
    RequirementSet::new(Location::EnvironmentHeld, reqs).expect("unique ids")
}

/// The five-gate half adder.
pub fn half_adder() -> Concept {
    Concept::build(
        &[
            ("a", "A"),
            ("b", "B"),
            ("g1", GATE),
            ("g2", GATE),
            ("g3", GATE),
            ("g4", GATE),
            ("g5", GATE),
            ("s", "S"),
            ("c", "C"),
        ],
        &[
            (("a", "o"), ("g1", "x")),
            (("b", "o"), ("g1", "y")),
            (("a", "o"), ("g2", "x")),
            (("g1", "z"), ("g2", "y")),
            (("b", "o"), ("g3", "x")),
            (("g1", "z"), ("g3", "y")),
            (("g2", "z"), ("g4", "x")),
            (("g3", "z"), ("g4", "y")),
            (("g1", "z"), ("g5", "x")),
            (("g1", "z"), ("g5", "y")),
            (("g4", "z"), ("s", "i")),
            (("g5", "z"), ("c", "i")),
        ],
    )
    .expect("half adder")
}

enum Src {
    Input(usize),
    Gate(usize),
}

pub(crate) fn compile(c: &Concept, time: TimeScale) -> Result<Compiled, CompileError> {
    let alphabet = alphabet();
    let net = analyze(c, &alphabet)?;
    let mut inputs: Vec<PortLabel> = Vec::new();
    for (id, node) in c.nodes() {
        if SOURCES.contains(&node.kind.as_str()) {
            inputs.push(label(id, &node.kind, "o", Role::Source));
        }
    }
    for (id, node) in c.nodes() {
        if node.kind == GATE {
            for p in ["x", "y"] {
                if !net.driver.contains_key(&(id.as_str(), p)) {
                    inputs.push(label(id, GATE, p, Role::OpenInput));
                }
            }
        }
    }
    if inputs.len() > MAX_OPEN_INPUTS {
        return Err(CompileError::TooManyInputs {
            count: inputs.len(),
            limit: MAX_OPEN_INPUTS,
        });
    }

    let gate_ids: Vec<&str> = net
        .order
        .iter()
        .copied()
        .filter(|id| c.nodes()[*id].kind == GATE)
        .collect();
    let gate_pos: BTreeMap<&str, usize> = gate_ids.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let input_pos: BTreeMap<(&str, &str), usize> = inputs
        .iter()
        .enumerate()
        .map(|(i, l)| ((l.node.as_str(), l.port.as_str()), i))
        .collect();
    let resolve = |node: &str, port: &str| -> Src {
        match net.driver.get(&(node, port)) {
            Some(from) => match gate_pos.get(from.node.as_str()) {
                Some(&g) => Src::Gate(g),
                None => Src::Input(input_pos[&(from.node.as_str(), "o")]),
            },
            None => Src::Input(input_pos[&(node, port)]),
        }
    };
    let gate_args: Vec<(Src, Src)> = gate_ids.iter().map(|g| (resolve(g, "x"), resolve(g, "y"))).collect();

    let mut outputs: Vec<PortLabel> = Vec::new();
    let mut taps: Vec<Src> = Vec::new();
    for (id, node) in c.nodes() {
        if SINKS.contains(&node.kind.as_str()) {
            outputs.push(label(id, &node.kind, "i", Role::Sink));
            taps.push(resolve(id, "i"));
        }
    }
    for (id, kind, port) in open_outputs(c, &alphabet) {
        if kind == GATE {
            taps.push(Src::Gate(gate_pos[id.as_str()]));
            outputs.push(label(&id, &kind, &port, Role::OpenOutput));
        }
    }

    let bits = vec![Value::Int(0), Value::Int(1)];
    let domains = vec![bits; inputs.len()];
    let machine = stateless_machine(time, &domains, |row| {
        let ins: Vec<i64> = row.iter().map(|v| v.as_int().expect("bit")).collect();
        let mut vals = vec![0i64; gate_args.len()];
        let get = |s: &Src, vals: &[i64]| match s {
            Src::Input(i) => ins[*i],
            Src::Gate(g) => vals[*g],
        };
        for (g, (x, y)) in gate_args.iter().enumerate() {
            vals[g] = 1 - (get(x, &vals) & get(y, &vals));
        }
        taps.iter().map(|t| Value::Int(get(t, &vals))).collect()
    })?;
    Ok(Compiled {
        machine,
        inputs,
        outputs,
        stage_cost: c.count_kind(GATE) as u64,
    })
}

fn label(node: &str, kind: &str, port: &str, role: Role) -> PortLabel {
    PortLabel {
        node: node.to_string(),
        kind: kind.to_string(),
        port: port.to_string(),
        role,
    }
}

/// Truth tables of every signal over the four (A, B) rows, one bit per row
/// with row index `2a + b`. Signals that depend on an open input are left
/// out; `None` when some port has two drivers or the wiring has a loop.
pub fn signals(c: &Concept) -> Option<BTreeMap<String, u8>> {
    const A: u8 = 0b1100;
    const B: u8 = 0b1010;
    let mut driver: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for e in c.edges() {
        if driver.insert((&e.to.node, &e.to.port), &e.from.node).is_some() {
            return None;
        }
    }
    // `None` marks a signal that depends on an open input.
    let mut table: BTreeMap<&str, Option<u8>> = BTreeMap::new();
    let mut pending: Vec<&str> = c.nodes().keys().map(String::as_str).collect();
    while !pending.is_empty() {
        let mut rest = Vec::new();
        for id in &pending {
            let input = |p: &str| match driver.get(&(*id, p)) {
                None => Ok(None),
                Some(d) => table.get(d).copied().ok_or(()),
            };
            let v = match c.nodes()[*id].kind.as_str() {
                "A" => Ok(Some(A)),
                "B" => Ok(Some(B)),
                GATE => match (input("x"), input("y")) {
                    (Ok(x), Ok(y)) => Ok(x.zip(y).map(|(x, y)| !(x & y) & 0xF)),
                    _ => Err(()),
                },
                _ => input("i"),
            };
            match v {
                Ok(v) => {
                    table.insert(id, v);
                }
                Err(()) => rest.push(*id),
            }
        }
        if rest.len() == pending.len() {
            return None;
        }
        pending = rest;
    }
    Some(
        table
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect(),
    )
}
