use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::machine::{DataSet, MealySystem, TimeScale, Value};
use super::SystemError;

/// A state merge and an output projection; either may be omitted, meaning
/// the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionSpec {
    #[serde(default)]
    pub state_merge: Option<Vec<(Value, Value)>>,
    #[serde(default)]
    pub output_projection: Option<Vec<(Value, Value)>>,
}

/// A machine whose tables are sets; it over-approximates the behaviour of
/// the concrete machine it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractSystem {
    time: TimeScale,
    input: DataSet,
    output: DataSet,
    states: DataSet,
    initial: Value,
    /// Indexed like the concrete tables: (input, state, time).
    out_sets: Vec<BTreeSet<usize>>,
    next_sets: Vec<BTreeSet<usize>>,
}

fn total_map(
    pairs: &Option<Vec<(Value, Value)>>,
    domain: &DataSet,
    what: &str,
) -> Result<BTreeMap<Value, Value>, SystemError> {
    let Some(pairs) = pairs else {
        return Ok(domain.values().iter().map(|v| (v.clone(), v.clone())).collect());
    };
    let mut map = BTreeMap::new();
    for (k, v) in pairs {
        if !domain.contains(k) {
            return Err(SystemError::Malformed(format!("{what} maps unknown value {k}")));
        }
        if map.insert(k.clone(), v.clone()).is_some() {
            return Err(SystemError::Malformed(format!("{what} maps {k} twice")));
        }
    }
    if let Some(missing) = domain.values().iter().find(|v| !map.contains_key(*v)) {
        return Err(SystemError::Malformed(format!("{what} does not cover {missing}")));
    }
    Ok(map)
}

/// Merges states and projects outputs. Every concrete transition is kept,
/// so each concrete trace is a trace of the result.
pub fn abstract_system(x: &MealySystem, spec: &AbstractionSpec) -> Result<AbstractSystem, SystemError> {
    let merge = total_map(&spec.state_merge, x.states(), "state merge")?;
    let project = total_map(&spec.output_projection, x.output(), "output projection")?;
    let states = DataSet::new(merge.values().cloned())?;
    let output = DataSet::new(project.values().cloned())?;
    let s_of: Vec<usize> = x
        .states()
        .values()
        .iter()
        .map(|s| states.index_of(&merge[s]).expect("image"))
        .collect();
    let o_of: Vec<usize> = x
        .output()
        .values()
        .iter()
        .map(|o| output.index_of(&project[o]).expect("image"))
        .collect();
    let width = x.horizon() as usize + 1;
    let slots = x.input().len() * states.len() * width;
    let mut out_sets = vec![BTreeSet::new(); slots];
    let mut next_sets = vec![BTreeSet::new(); slots];
    for i in 0..x.input().len() {
        for s in 0..x.states().len() {
            for t in 0..=x.horizon() {
                let (o, n) = x.step_idx(i, s, t);
                let k = (i * states.len() + s_of[s]) * width + t as usize;
                out_sets[k].insert(o_of[o]);
                next_sets[k].insert(s_of[n]);
            }
        }
    }
    Ok(AbstractSystem {
        time: x.time(),
        input: x.input().clone(),
        output,
        initial: merge[x.initial()].clone(),
        states,
        out_sets,
        next_sets,
    })
}

impl AbstractSystem {
    pub fn time(&self) -> TimeScale {
        self.time
    }

    pub fn states(&self) -> &DataSet {
        &self.states
    }

    pub fn output(&self) -> &DataSet {
        &self.output
    }

    fn slot(&self, i: usize, s: usize, t: u32) -> usize {
        (i * self.states.len() + s) * (self.time.horizon() as usize + 1) + t as usize
    }

    /// Every table entry is a single value.
    pub fn is_deterministic(&self) -> bool {
        self.out_sets.iter().all(|s| s.len() == 1) && self.next_sets.iter().all(|s| s.len() == 1)
    }

    /// Whether `outputs` is a possible response to `inputs`.
    pub fn accepts(&self, inputs: &[Value], outputs: &[Value]) -> bool {
        if inputs.len() != outputs.len() || inputs.len() > self.time.horizon() as usize {
            return false;
        }
        let mut current: BTreeSet<usize> =
            BTreeSet::from([self.states.index_of(&self.initial).expect("initial in states")]);
        for (t, (iv, ov)) in inputs.iter().zip(outputs).enumerate() {
            let (Some(i), Some(o)) = (self.input.index_of(iv), self.output.index_of(ov)) else {
                return false;
            };
            let mut next = BTreeSet::new();
            for &s in &current {
                let k = self.slot(i, s, t as u32);
                if self.out_sets[k].contains(&o) {
                    next.extend(self.next_sets[k].iter().copied());
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        true
    }

    /// The concrete machine, when every entry is a single value.
    pub fn to_concrete(&self) -> Option<MealySystem> {
        if !self.is_deterministic() {
            return None;
        }
        let first = |s: &BTreeSet<usize>| *s.iter().next().expect("non-empty");
        Some(MealySystem::from_indices(
            self.time,
            self.input.clone(),
            self.output.clone(),
            self.states.clone(),
            self.states.index_of(&self.initial).expect("initial in states"),
            |i, s, t| {
                let k = self.slot(i, s, t);
                (first(&self.out_sets[k]), first(&self.next_sets[k]))
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::equivalence::equivalent;
    use crate::system::library::{counter, parity};

    fn ts() -> TimeScale {
        TimeScale::new(5).unwrap()
    }

    #[test]
    fn identity_abstraction_is_equivalent() {
        let x = counter(ts(), 3);
        let a = abstract_system(&x, &AbstractionSpec::default()).unwrap();
        assert!(a.is_deterministic());
        assert!(equivalent(&a.to_concrete().unwrap(), &x, 5).unwrap());
    }

    #[test]
    fn merging_states_admits_concrete_traces() {
        let x = counter(ts(), 3);
        let spec = AbstractionSpec {
            state_merge: Some(vec![
                (Value::Int(0), Value::sym("zero")),
                (Value::Int(1), Value::sym("pos")),
                (Value::Int(2), Value::sym("pos")),
            ]),
            output_projection: Some(vec![
                (Value::Int(0), Value::Int(0)),
                (Value::Int(1), Value::Int(1)),
                (Value::Int(2), Value::Int(1)),
            ]),
        };
        let a = abstract_system(&x, &spec).unwrap();
        assert!(!a.is_deterministic());
        let input: Vec<Value> = [1, 1, 0, 1, 1].iter().map(|&b| Value::Int(b)).collect();
        let out: Vec<Value> = x
            .simulate(&input)
            .unwrap()
            .outputs
            .iter()
            .map(|o| Value::Int(o.as_int().unwrap().min(1)))
            .collect();
        assert!(a.accepts(&input, &out));
        // Leaving zero requires a one on the input.
        let bad = vec![Value::Int(0), Value::Int(1)];
        assert!(!a.accepts(&[Value::Int(0), Value::Int(0)], &bad));
    }

    #[test]
    fn partial_merge_map_is_malformed() {
        let spec = AbstractionSpec {
            state_merge: Some(vec![(Value::Int(0), Value::Int(0))]),
            output_projection: None,
        };
        assert!(matches!(
            abstract_system(&parity(ts()), &spec),
            Err(SystemError::Malformed(_))
        ));
    }
}
