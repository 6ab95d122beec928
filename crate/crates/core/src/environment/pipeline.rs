//! Typed dataflow pipelines over small numbers and their text renderings.

use std::collections::BTreeMap;

use super::compile::{analyze, stateless_machine, Compiled, PortLabel, Role};
use super::CompileError;
use crate::language::{Alphabet, AlphabetBuilder, Cmp, Concept, Constraint, Direction, Rule, RuleCategory, RuleSet};
use crate::system::{TimeScale, Value};
use crate::verification::{Location, Requirement, RequirementSet, Scenario};

/// Numbers range over `0..MODULUS`.
pub const MODULUS: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortType {
    Num,
    Text,
}

/// Stage kinds with their input type, output type, and cost.
pub const STAGES: [(&str, Option<PortType>, Option<PortType>, u64); 5] = [
    ("source", None, Some(PortType::Num), 1),
    ("inc", Some(PortType::Num), Some(PortType::Num), 1),
    ("evens", Some(PortType::Num), Some(PortType::Num), 2),
    ("show", Some(PortType::Num), Some(PortType::Text), 1),
    ("sink", Some(PortType::Text), None, 1),
];

fn stage(kind: &str) -> (Option<PortType>, Option<PortType>, u64) {
    let (_, i, o, c) = STAGES.iter().find(|s| s.0 == kind).expect("validated kind");
    (*i, *o, *c)
}

pub fn alphabet() -> Alphabet {
    let mut b = AlphabetBuilder::new().connective("feeds");
    for (kind, input, output, _) in STAGES {
        let mut ports = Vec::new();
        if input.is_some() {
            ports.push(("i", Direction::In, true));
        }
        if output.is_some() {
            ports.push(("o", Direction::Out, false));
        }
        b = b.component(kind, &ports, &[]);
    }
    b.build().expect("pipeline alphabet")
}

pub fn rules() -> RuleSet {
    RuleSet::new(
        alphabet(),
        vec![
            Rule::new("single-driver", RuleCategory::Formal, Constraint::MaxFanIn(1)),
            Rule::new("acyclic", RuleCategory::Formal, Constraint::Acyclic),
            Rule::new("one-source", RuleCategory::Conceptual, Constraint::count("source", Cmp::Le, 1)),
        ],
    )
    .expect("pipeline rules")
}

/// Type safety, a cost budget, and one end-to-end stream.
pub fn default_requirements() -> RequirementSet {
    let num = |v: i64| Value::Int(v);
    RequirementSet::new(
        Location::EnvironmentHeld,
        vec![
            Requirement::new("type-safe", Scenario::TypeSafe, 2.0),
            Requirement::new("budget", Scenario::CostBound { max: 6.0 }, 1.0),
            Requirement::new(
                "even-successors",
                Scenario::Stream {
                    inputs: vec![num(0), num(1), num(2), num(3)],
                    expected: vec![Value::Eps, Value::sym("t2"), Value::Eps, Value::sym("t0")],
                },
                3.0,
            ),
        ],
    )
    .expect("unique ids")
}

/// source → inc → evens → show → sink.
pub fn reference_pipeline() -> Concept {
    Concept::build(
        &[("p0", "source"), ("p1", "inc"), ("p2", "evens"), ("p3", "show"), ("p4", "sink")],
        &[
            (("p0", "o"), ("p1", "i")),
            (("p1", "o"), ("p2", "i")),
            (("p2", "o"), ("p3", "i")),
            (("p3", "o"), ("p4", "i")),
        ],
    )
    .expect("reference pipeline")
}

fn apply(kind: &str, v: &Value) -> Value {
    match (kind, v) {
        (_, Value::Eps) => Value::Eps,
        ("inc", Value::Int(x)) => Value::Int((x + 1) % MODULUS),
        ("evens", Value::Int(x)) if x % 2 == 0 => Value::Int(*x),
        ("evens", _) => Value::Eps,
        ("show", Value::Int(x)) => Value::Sym(format!("t{x}")),
        (_, v) => v.clone(),
    }
}

pub(crate) fn compile(c: &Concept, time: TimeScale) -> Result<Compiled, CompileError> {
    let net = analyze(c, &alphabet())?;
    for e in c.edges() {
        let (_, out_ty, _) = stage(&c.nodes()[&e.from.node].kind);
        let (in_ty, _, _) = stage(&c.nodes()[&e.to.node].kind);
        if out_ty != in_ty {
            return Err(CompileError::TypeMismatch(format!("{} -> {}", e.from, e.to)));
        }
    }
    let label = |id: &str, kind: &str, port: &str, role| PortLabel {
        node: id.to_string(),
        kind: kind.to_string(),
        port: port.to_string(),
        role,
    };
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (id, node) in c.nodes() {
        match node.kind.as_str() {
            "source" => inputs.push(label(id, "source", "o", Role::Source)),
            "sink" => outputs.push(label(id, "sink", "i", Role::Sink)),
            _ => {}
        }
    }
    let source_pos: BTreeMap<&str, usize> =
        inputs.iter().enumerate().map(|(i, l)| (l.node.as_str(), i)).collect();
    let nums: Vec<Value> = (0..MODULUS).map(Value::Int).collect();
    let domains = vec![nums; inputs.len()];
    let machine = stateless_machine(time, &domains, |row| {
        let mut vals: BTreeMap<&str, Value> = BTreeMap::new();
        for id in &net.order {
            let kind = c.nodes()[*id].kind.as_str();
            let v = match kind {
                "source" => row[source_pos[id]].clone(),
                _ => {
                    let from = net.driver[&(*id, "i")];
                    apply(kind, &vals[from.node.as_str()])
                }
            };
            vals.insert(id, v);
        }
        outputs.iter().map(|l| vals[l.node.as_str()].clone()).collect()
    })?;
    let stage_cost = c.nodes().values().map(|n| stage(&n.kind).2).sum();
    Ok(Compiled {
        machine,
        inputs,
        outputs,
        stage_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::compile::scenario_holds;

    fn ts() -> TimeScale {
        TimeScale::new(4).unwrap()
    }

    #[test]
    fn reference_pipeline_meets_every_requirement() {
        let c = reference_pipeline();
        assert!(rules().is_permissible(&c).unwrap());
        let compiled = compile(&c, ts()).unwrap();
        assert_eq!(compiled.stage_cost, 6);
        for r in default_requirements().requirements() {
            assert!(scenario_holds(&compiled, &r.scenario), "{}", r.id);
        }
    }

    #[test]
    fn text_into_number_port_is_a_type_error() {
        let c = Concept::build(
            &[("s", "source"), ("f", "show"), ("g", "inc")],
            &[(("s", "o"), ("f", "i")), (("f", "o"), ("g", "i"))],
        )
        .unwrap();
        assert!(matches!(compile(&c, ts()), Err(CompileError::TypeMismatch(_))));
    }

    #[test]
    fn stage_without_input_is_dangling() {
        let c = Concept::build(&[("g", "inc")], &[]).unwrap();
        assert_eq!(compile(&c, ts()).unwrap_err(), CompileError::DanglingPort("g.i".into()));
    }

    #[test]
    fn pipeline_without_sink_is_not_type_safe() {
        let c = Concept::build(&[("k", "source"), ("f", "show")], &[(("k", "o"), ("f", "i"))]).unwrap();
        let compiled = compile(&c, ts()).unwrap();
        assert!(!scenario_holds(&compiled, &Scenario::TypeSafe));
    }
}
