use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{circuit, pipeline, CompileError, DomainKind};
use crate::language::{Alphabet, Concept, Direction, LanguageError, PortRef};
use crate::system::{DataSet, MealySystem, TimeScale, Value};
use crate::verification::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Source,
    Sink,
    /// An input port nothing drives; its value is chosen from outside.
    OpenInput,
    /// An output port that drives nothing.
    OpenOutput,
}

/// Which port a component of the machine's input or output tuple belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortLabel {
    pub node: String,
    pub kind: String,
    pub port: String,
    pub role: Role,
}

/// A concept's behaviour. Tuples with one component are flattened to the
/// component itself; no components gives the unit value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compiled {
    pub machine: MealySystem,
    pub inputs: Vec<PortLabel>,
    pub outputs: Vec<PortLabel>,
    pub stage_cost: u64,
}

pub fn compile_concept(c: &Concept, domain: DomainKind, time: TimeScale) -> Result<Compiled, CompileError> {
    match domain {
        DomainKind::Circuit => circuit::compile(c, time),
        DomainKind::Pipeline => pipeline::compile(c, time),
    }
}

/// Port-level view of a concept after the structural checks every domain
/// shares.
pub(crate) struct Net<'a> {
    pub order: Vec<&'a str>,
    pub driver: BTreeMap<(&'a str, &'a str), &'a PortRef>,
}

pub(crate) fn analyze<'a>(c: &'a Concept, alphabet: &Alphabet) -> Result<Net<'a>, CompileError> {
    c.validate(alphabet).map_err(|e| match e {
        LanguageError::UnknownSymbol(s) if alphabet.component(&s).is_none() => CompileError::UnknownKind(s),
        other => CompileError::Malformed(other.to_string()),
    })?;
    let mut driver = BTreeMap::new();
    for e in c.edges() {
        if driver.insert((e.to.node.as_str(), e.to.port.as_str()), &e.from).is_some() {
            return Err(CompileError::MultipleDrivers(e.to.to_string()));
        }
    }
    for (id, node) in c.nodes() {
        let spec = alphabet.component(&node.kind).expect("validated");
        for p in spec.inputs() {
            if p.mandatory && !driver.contains_key(&(id.as_str(), p.name.as_str())) {
                return Err(CompileError::DanglingPort(PortRef::new(id, &p.name).to_string()));
            }
        }
    }
    // Kahn's algorithm, smallest id first for a stable order.
    let mut indegree: BTreeMap<&str, usize> = c.nodes().keys().map(|k| (k.as_str(), 0)).collect();
    for e in c.edges() {
        *indegree.get_mut(e.to.node.as_str()).expect("validated") += 1;
    }
    let mut ready: std::collections::BTreeSet<&str> =
        indegree.iter().filter(|(_, &d)| d == 0).map(|(k, _)| *k).collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(n) = ready.pop_first() {
        order.push(n);
        for e in c.edges().iter().filter(|e| e.from.node == n) {
            let d = indegree.get_mut(e.to.node.as_str()).expect("validated");
            *d -= 1;
            if *d == 0 {
                ready.insert(e.to.node.as_str());
            }
        }
    }
    if order.len() != c.node_count() {
        return Err(CompileError::CombinationalLoop);
    }
    Ok(Net { order, driver })
}

/// Output ports that drive nothing, in (node, port) order.
pub(crate) fn open_outputs(c: &Concept, alphabet: &Alphabet) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for (id, node) in c.nodes() {
        let spec = alphabet.component(&node.kind).expect("validated");
        for p in spec.ports.iter().filter(|p| p.direction == Direction::Out) {
            if !c.edges().iter().any(|e| e.from.node == *id && e.from.port == p.name) {
                out.push((id.clone(), node.kind.clone(), p.name.clone()));
            }
        }
    }
    out
}

/// Every tuple over `domains`, in sorted order, flattened like machine values.
pub(crate) fn tuples(domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut acc: Vec<Vec<Value>> = vec![Vec::new()];
    for d in domains {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    acc
}

/// Builds a stateless machine from an evaluator over input components.
pub(crate) fn stateless_machine(
    time: TimeScale,
    domains: &[Vec<Value>],
    eval: impl Fn(&[Value]) -> Vec<Value>,
) -> Result<MealySystem, CompileError> {
    let rows = tuples(domains);
    let outs: Vec<Value> = rows.iter().map(|r| Value::from_components(eval(r))).collect();
    let input = DataSet::new(rows.iter().cloned().map(Value::from_components)).map_err(internal)?;
    let output = DataSet::new(outs.iter().cloned()).map_err(internal)?;
    let table: BTreeMap<Value, Value> = rows.into_iter().map(Value::from_components).zip(outs).collect();
    MealySystem::stateless(time, input, output, |i| table[i].clone()).map_err(internal)
}

fn internal(e: crate::system::SystemError) -> CompileError {
    CompileError::Malformed(e.to_string())
}

/// Whether a compiled concept satisfies `scenario`. Decided by exhaustive
/// simulation over every open input.
pub fn scenario_holds(compiled: &Compiled, scenario: &Scenario) -> bool {
    let m = &compiled.machine;
    let positions = |role: Role, kind: &str| -> Vec<usize> {
        compiled
            .outputs
            .iter()
            .enumerate()
            .filter(|(_, l)| l.role == role && l.kind == kind)
            .map(|(i, _)| i)
            .collect()
    };
    match scenario {
        Scenario::TruthRow { inputs, outputs } => {
            let mut targets = Vec::new();
            for (kind, bit) in outputs {
                match positions(Role::Sink, kind).as_slice() {
                    [p] => targets.push((*p, Value::Int(*bit))),
                    _ => return false,
                }
            }
            let mut consistent = 0usize;
            for iv in m.input().values() {
                let comps = flat_components(iv, compiled.inputs.len());
                let matches = compiled.inputs.iter().zip(&comps).all(|(l, v)| {
                    l.role != Role::Source || inputs.get(&l.kind).is_none_or(|b| *v == Value::Int(*b))
                });
                if !matches {
                    continue;
                }
                consistent += 1;
                let (o, _) = m.step(m.initial(), iv, 0).expect("value of input set");
                let oc = flat_components(&o, compiled.outputs.len());
                if targets.iter().any(|(p, want)| oc[*p] != *want) {
                    return false;
                }
            }
            consistent > 0
        }
        Scenario::Stream { inputs, expected } => {
            if inputs.len() != expected.len() || inputs.len() > m.horizon() as usize {
                return false;
            }
            if compiled.inputs.iter().any(|l| l.role != Role::Source) {
                return false;
            }
            let sinks: Vec<usize> = compiled
                .outputs
                .iter()
                .enumerate()
                .filter(|(_, l)| l.role == Role::Sink)
                .map(|(i, _)| i)
                .collect();
            if sinks.is_empty() {
                return false;
            }
            let stream: Vec<Value> = inputs
                .iter()
                .map(|v| Value::from_components(vec![v.clone(); compiled.inputs.len()]))
                .collect();
            let Ok(trace) = m.simulate(&stream) else {
                return false;
            };
            trace.outputs.iter().zip(expected).all(|(o, want)| {
                let oc = flat_components(o, compiled.outputs.len());
                sinks.iter().all(|&p| oc[p] == *want)
            })
        }
        Scenario::CostBound { max } => (compiled.stage_cost as f64) <= *max,
        Scenario::TypeSafe => {
            compiled.inputs.iter().any(|l| l.role == Role::Source)
                && compiled.outputs.iter().any(|l| l.role == Role::Sink)
        }
    }
}

/// Components of a flattened tuple of known arity.
fn flat_components(v: &Value, arity: usize) -> Vec<Value> {
    match arity {
        1 => vec![v.clone()],
        _ => v.components().into_iter().take(arity).collect(),
    }
}
