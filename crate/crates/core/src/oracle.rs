//! Brute-force reference implementations used to cross-check the engine.
//! Each one is slow and direct on purpose and shares as little code with
//! the engine as practical.

use std::collections::{BTreeMap, BTreeSet};

use crate::environment::{circuit, EnvironmentModel};
use crate::explore::{apply_sequence, ActionContext, DesignSequence};
use crate::hash::to_text;
use crate::language::{canonical_form, node_id, Concept, Edge, Node, PortRef, RuleSet};
use crate::system::{MealySystem, Value};
use crate::verification::{RequirementSet, Scenario};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle would visit more than {ceiling} cases")]
    BudgetExceeded { ceiling: u64 },
    #[error("unknown component kind {0}")]
    UnknownKind(String),
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Smallest serialized form over every relabeling of the nodes.
fn brute_canonical(c: &Concept) -> String {
    let ids: Vec<&String> = c.nodes().keys().collect();
    let mut best: Option<String> = None;
    for perm in permutations(ids.len()) {
        let rename: BTreeMap<&str, String> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), node_id(perm[i]))).collect();
        let nodes: BTreeMap<String, Node> = c.nodes().iter().map(|(id, n)| (rename[id.as_str()].clone(), n.clone())).collect();
        let edges: Vec<Edge> = c
            .edges()
            .iter()
            .map(|e| Edge {
                from: PortRef::new(&rename[e.from.node.as_str()], &e.from.port),
                to: PortRef::new(&rename[e.to.node.as_str()], &e.to.port),
            })
            .collect();
        let text = to_text(&Concept::from_parts(nodes, edges).expect("relabeling keeps validity"));
        if best.as_ref().is_none_or(|b| text < *b) {
            best = Some(text);
        }
    }
    best.unwrap_or_else(|| to_text(c))
}

/// Number of permissible concepts with at most `n` nodes, up to renaming,
/// found by generating every labeled graph over every ordered choice of
/// kinds and filtering. Counts the empty concept. Property-free alphabets
/// only.
pub fn enumerate_count(rules: &RuleSet, n: usize, ceiling: u64) -> Result<usize, OracleError> {
    let alphabet = rules.alphabet();
    let kinds: Vec<&str> = alphabet.component_kinds().collect();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(to_text(&Concept::empty()));
    let mut visited = 0u64;
    for size in 1..=n {
        let mut choice = vec![0usize; size];
        loop {
            let ids: Vec<String> = (0..size).map(node_id).collect();
            let nodes: BTreeMap<String, Node> = ids.iter().cloned().zip(choice.iter().map(|&k| Node::new(kinds[k]))).collect();
            let mut slots = Vec::new();
            for (a, na) in &nodes {
                let sa = alphabet.component(&na.kind).expect("alphabet kind");
                for out in sa.outputs() {
                    for (b, nb) in &nodes {
                        let sb = alphabet.component(&nb.kind).expect("alphabet kind");
                        for inp in sb.inputs() {
                            slots.push(Edge::new((a, &out.name), (b, &inp.name)));
                        }
                    }
                }
            }
            for mask in 0u64..(1u64 << slots.len()) {
                visited += 1;
                if visited > ceiling {
                    return Err(OracleError::BudgetExceeded { ceiling });
                }
                let edges = slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e.clone());
                let Ok(c) = Concept::from_parts(nodes.clone(), edges) else {
                    continue;
                };
                if matches!(rules.is_permissible(&c), Ok(true)) {
                    seen.insert(brute_canonical(&c));
                }
            }
            // Next ordered tuple of kinds.
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < kinds.len() {
                    break;
                }
                choice[i] = 0;
            }
            if choice.iter().all(|&k| k == 0) {
                break;
            }
        }
    }
    Ok(seen.len())
}

/// A circuit read directly off its graph.
struct Wiring<'a> {
    c: &'a Concept,
    driver: BTreeMap<(&'a str, &'a str), Vec<&'a str>>,
}

impl<'a> Wiring<'a> {
    fn new(c: &'a Concept) -> Self {
        let mut driver: BTreeMap<(&str, &str), Vec<&str>> = BTreeMap::new();
        for e in c.edges() {
            driver.entry((e.to.node.as_str(), e.to.port.as_str())).or_default().push(e.from.node.as_str());
        }
        Wiring { c, driver }
    }

    fn well_formed(&self) -> bool {
        if self.driver.values().any(|d| d.len() > 1) {
            return false;
        }
        for (id, n) in self.c.nodes() {
            if circuit::SINKS.contains(&n.kind.as_str()) && !self.driver.contains_key(&(id.as_str(), "i")) {
                return false;
            }
        }
        // Each node reachable from itself means a loop.
        for start in self.c.nodes().keys() {
            let mut stack: Vec<&str> = self.c.edges().iter().filter(|e| e.from.node == *start).map(|e| e.to.node.as_str()).collect();
            let mut seen = BTreeSet::new();
            while let Some(n) = stack.pop() {
                if n == start {
                    return false;
                }
                if seen.insert(n) {
                    stack.extend(self.c.edges().iter().filter(|e| e.from.node == n).map(|e| e.to.node.as_str()));
                }
            }
        }
        true
    }

    /// Inputs of the circuit: each source node, then each undriven gate port.
    fn free(&self) -> Vec<(&'a str, &'static str)> {
        let mut v = Vec::new();
        for (id, n) in self.c.nodes() {
            if circuit::SOURCES.contains(&n.kind.as_str()) {
                v.push((id.as_str(), "o"));
            }
        }
        for (id, n) in self.c.nodes() {
            if n.kind == circuit::GATE {
                for p in ["x", "y"] {
                    if !self.driver.contains_key(&(id.as_str(), p)) {
                        v.push((id.as_str(), p));
                    }
                }
            }
        }
        v
    }

    fn value(&self, node: &str, assign: &BTreeMap<(&str, &str), i64>) -> i64 {
        let n = &self.c.nodes()[node];
        let port = |p: &str| -> i64 {
            match self.driver.get(&(node, p)) {
                Some(d) => self.value(d[0], assign),
                None => assign[&(node, p)],
            }
        };
        match n.kind.as_str() {
            circuit::GATE => 1 - (port("x") & port("y")),
            k if circuit::SINKS.contains(&k) => port("i"),
            _ => assign[&(node, "o")],
        }
    }
}

/// Rows of `((A, B), sink values)`.
pub type TruthTable = Vec<((i64, i64), BTreeMap<String, i64>)>;

/// Truth table of a closed circuit: for each (A, B) the values of every
/// sink kind. `None` unless the circuit is well formed, has exactly one node
/// of each terminal kind, and no undriven gate input.
pub fn truth_table(c: &Concept) -> Option<TruthTable> {
    let w = Wiring::new(c);
    if !w.well_formed() {
        return None;
    }
    for k in circuit::SOURCES.iter().chain(circuit::SINKS.iter()) {
        if c.count_kind(k) != 1 {
            return None;
        }
    }
    let free = w.free();
    if free.len() != 2 {
        return None;
    }
    let node_of = |kind: &str| c.nodes().iter().find(|(_, n)| n.kind == kind).map(|(id, _)| id.as_str()).expect("one node");
    let mut rows = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            let assign: BTreeMap<(&str, &str), i64> = [((node_of("A"), "o"), a), ((node_of("B"), "o"), b)].into();
            let outs = circuit::SINKS.iter().map(|s| (s.to_string(), w.value(node_of(s), &assign))).collect();
            rows.push(((a, b), outs));
        }
    }
    Some(rows)
}

/// Reward a model would pay for submitting a circuit, computed straight
/// from the graph: `None` for circuits that are not well formed.
pub fn circuit_reward(
    c: &Concept,
    requirements: &RequirementSet,
    model: &EnvironmentModel,
) -> Result<Option<f64>, OracleError> {
    let known: BTreeSet<&str> = circuit::SOURCES.iter().chain(circuit::SINKS.iter()).copied().chain([circuit::GATE]).collect();
    if let Some(n) = c.nodes().values().find(|n| !known.contains(n.kind.as_str())) {
        return Err(OracleError::UnknownKind(n.kind.clone()));
    }
    if c.is_empty() {
        return Ok(Some(0.0));
    }
    let w = Wiring::new(c);
    let free = w.free();
    if !w.well_formed() || free.len() > circuit::MAX_OPEN_INPUTS {
        return Ok(None);
    }
    let mut gained = 0.0;
    for r in requirements.requirements() {
        let Scenario::TruthRow { inputs, outputs } = &r.scenario else {
            continue;
        };
        let sinks: Option<Vec<(&str, i64)>> = outputs
            .iter()
            .map(|(k, v)| {
                let ids: Vec<&str> = c.ids_of_kind(k).collect();
                (ids.len() == 1).then(|| (ids[0], *v))
            })
            .collect();
        let Some(sinks) = sinks else {
            continue;
        };
        let mut consistent = 0;
        let mut holds = true;
        for bits in 0u64..(1 << free.len()) {
            let assign: BTreeMap<(&str, &str), i64> =
                free.iter().enumerate().map(|(i, f)| (*f, (bits >> i & 1) as i64)).collect();
            let ok = free.iter().all(|(node, port)| {
                let kind = c.nodes()[*node].kind.as_str();
                *port != "o" || inputs.get(kind).is_none_or(|v| *v == assign[&(*node, *port)])
            });
            if !ok {
                continue;
            }
            consistent += 1;
            if sinks.iter().any(|(id, v)| w.value(id, &assign) != *v) {
                holds = false;
                break;
            }
        }
        if holds && consistent > 0 {
            gained += r.weight;
        }
    }
    // Per-kind charge, summed in kind order.
    let mut counts: BTreeMap<&str, f64> = BTreeMap::new();
    for n in c.nodes().values() {
        *counts.entry(n.kind.as_str()).or_default() += 1.0;
    }
    let cost: f64 = counts.iter().map(|(k, n)| model.cost_per_kind.get(*k).copied().unwrap_or(0.0) * n).sum();
    Ok(Some(gained - cost))
}

/// Equivalence by simulating every input stream of length `h`.
pub fn streams_equivalent(a: &MealySystem, b: &MealySystem, h: u32, ceiling: u64) -> Result<bool, OracleError> {
    let values: Vec<Value> = a.input().values().to_vec();
    let count = (values.len() as u64).checked_pow(h).filter(|c| *c <= ceiling);
    let Some(count) = count else {
        return Err(OracleError::BudgetExceeded { ceiling });
    };
    for k in 0..count {
        let mut rest = k;
        let stream: Vec<Value> = (0..h)
            .map(|_| {
                let v = values[(rest % values.len() as u64) as usize].clone();
                rest /= values.len() as u64;
                v
            })
            .collect();
        match (a.simulate(&stream), b.simulate(&stream)) {
            (Ok(x), Ok(y)) if x.outputs == y.outputs => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Every concept reachable from `start` by at most `rounds` sequence
/// applications, in canonical form.
pub fn bfs_frontier(start: &Concept, policy: &[DesignSequence], ctx: &ActionContext, rounds: u32) -> BTreeSet<Concept> {
    let mut all: BTreeSet<Concept> = [canonical_form(start)].into();
    let mut layer = all.clone();
    for _ in 0..rounds {
        let mut next = BTreeSet::new();
        for c in &layer {
            for s in policy {
                if let Some(n) = apply_sequence(c, s, ctx).concept {
                    let n = canonical_form(&n);
                    if !all.contains(&n) {
                        next.insert(n);
                    }
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}
