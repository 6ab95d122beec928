use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::machine::{DataSet, MealySystem, Value};
use super::SystemError;

/// How outputs of the first stage become inputs of the second.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Wiring {
    /// Output values are passed through unchanged.
    Identity,
    /// Explicit value translation; must cover every output of the first stage.
    Map(Vec<(Value, Value)>),
}

impl Wiring {
    fn resolve(&self, y: &MealySystem, z: &MealySystem) -> Result<Vec<usize>, SystemError> {
        let table: Option<BTreeMap<&Value, &Value>> = match self {
            Wiring::Identity => None,
            Wiring::Map(pairs) => Some(pairs.iter().map(|(a, b)| (a, b)).collect()),
        };
        y.output()
            .values()
            .iter()
            .map(|o| {
                let v = match &table {
                    None => o,
                    Some(t) => t.get(o).copied().ok_or_else(|| {
                        SystemError::TypeMismatch(format!("wiring does not cover output {o}"))
                    })?,
                };
                z.input().index_of(v).ok_or_else(|| {
                    SystemError::TypeMismatch(format!("{v} is not an input of the second stage"))
                })
            })
            .collect()
    }
}

/// Selects one component of a tuple-valued output and input for feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackLoop {
    pub output: usize,
    pub input: usize,
}

fn check_time(y: &MealySystem, z: &MealySystem) -> Result<(), SystemError> {
    if y.time() != z.time() {
        return Err(SystemError::TimeScaleMismatch);
    }
    Ok(())
}

/// Parallel composition: both machines step side by side on paired inputs.
pub fn product(y: &MealySystem, z: &MealySystem) -> Result<MealySystem, SystemError> {
    check_time(y, z)?;
    let nz = z.input().len();
    let oz = z.output().len();
    let sz = z.states().len();
    Ok(MealySystem::from_indices(
        y.time(),
        y.input().product(z.input()),
        y.output().product(z.output()),
        y.states().product(z.states()),
        y.initial_idx() * sz + z.initial_idx(),
        |i, s, t| {
            let (a, b) = y.step_idx(i / nz, s / sz, t);
            let (c, d) = z.step_idx(i % nz, s % sz, t);
            (a * oz + c, b * sz + d)
        },
    ))
}

/// Series composition: outputs of `y` feed `z` through `wiring` within the
/// same step. The two stages must be distinct machine instances.
pub fn connect(y: &MealySystem, z: &MealySystem, wiring: &Wiring) -> Result<MealySystem, SystemError> {
    if std::ptr::eq(y, z) {
        return Err(SystemError::SelfWiring);
    }
    check_time(y, z)?;
    let map = wiring.resolve(y, z)?;
    let sz = z.states().len();
    Ok(MealySystem::from_indices(
        y.time(),
        y.input().clone(),
        z.output().clone(),
        y.states().product(z.states()),
        y.initial_idx() * sz + z.initial_idx(),
        |i, s, t| {
            let (o, n) = y.step_idx(i, s / sz, t);
            let (p, m) = z.step_idx(map[o], s % sz, t);
            (p, n * sz + m)
        },
    ))
}

/// Closes a loop from one output component to one input component. The fed
/// back output must not depend on the input component it drives.
pub fn feedback(x: &MealySystem, lp: FeedbackLoop) -> Result<MealySystem, SystemError> {
    let inputs: Vec<Vec<Value>> = x.input().values().iter().map(Value::components).collect();
    let outputs: Vec<Vec<Value>> = x.output().values().iter().map(Value::components).collect();
    if inputs.iter().any(|c| lp.input >= c.len()) {
        return Err(SystemError::TypeMismatch(format!("no input component {}", lp.input)));
    }
    if outputs.iter().any(|c| lp.output >= c.len()) {
        return Err(SystemError::TypeMismatch(format!("no output component {}", lp.output)));
    }
    let drop = |mut c: Vec<Value>, k: usize| {
        c.remove(k);
        Value::from_components(c)
    };

    // Group inputs by the components that remain open.
    let mut groups: BTreeMap<Value, BTreeMap<Value, usize>> = BTreeMap::new();
    for (idx, c) in inputs.iter().enumerate() {
        groups
            .entry(drop(c.clone(), lp.input))
            .or_default()
            .insert(c[lp.input].clone(), idx);
    }
    let rest = DataSet::new(groups.keys().cloned())?;
    let out_rest = DataSet::new(outputs.iter().map(|c| drop(c.clone(), lp.output)))?;
    let out_map: Vec<usize> = outputs
        .iter()
        .map(|c| out_rest.index_of(&drop(c.clone(), lp.output)).expect("projected"))
        .collect();

    // Resolve the fed-back value for every (open input, state, time).
    let horizon = x.horizon();
    let members: Vec<&BTreeMap<Value, usize>> = groups.values().collect();
    let mut chosen = vec![0usize; members.len() * x.states().len() * (horizon as usize + 1)];
    for (r, group) in members.iter().enumerate() {
        for s in 0..x.states().len() {
            for t in 0..=horizon {
                let mut fed: Option<&Value> = None;
                for &i in group.values() {
                    let (o, _) = x.step_idx(i, s, t);
                    let v = &outputs[o][lp.output];
                    match fed {
                        None => fed = Some(v),
                        Some(prev) if prev != v => return Err(SystemError::AlgebraicLoop),
                        Some(_) => {}
                    }
                }
                let v = fed.expect("groups are non-empty");
                let i = *group.get(v).ok_or_else(|| {
                    SystemError::TypeMismatch(format!("fed-back value {v} is not an accepted input"))
                })?;
                chosen[(r * x.states().len() + s) * (horizon as usize + 1) + t as usize] = i;
            }
        }
    }
    let ns = x.states().len();
    Ok(MealySystem::from_indices(
        x.time(),
        rest,
        out_rest,
        x.states().clone(),
        x.initial_idx(),
        |r, s, t| {
            let i = chosen[(r * ns + s) * (horizon as usize + 1) + t as usize];
            let (o, n) = x.step_idx(i, s, t);
            (out_map[o], n)
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::library::{delay, identity, nand, not};
    use crate::system::machine::TimeScale;

    fn ts() -> TimeScale {
        TimeScale::new(6).unwrap()
    }

    fn bits(v: &[i64]) -> Vec<Value> {
        v.iter().map(|&b| Value::Int(b)).collect()
    }

    #[test]
    fn product_steps_components_independently() {
        let p = product(&delay(ts(), 0), &not(ts())).unwrap();
        let stream: Vec<Value> = [(1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(a, b)| Value::pair(Value::Int(a), Value::Int(b)))
            .collect();
        let out = p.simulate(&stream).unwrap().outputs;
        let want: Vec<Value> = [(0, 1), (1, 0), (0, 0)]
            .iter()
            .map(|&(a, b)| Value::pair(Value::Int(a), Value::Int(b)))
            .collect();
        assert_eq!(out, want);
    }

    #[test]
    fn connect_identity_then_delay_behaves_as_delay() {
        let d = delay(ts(), 0);
        let c = connect(&identity(ts()), &d, &Wiring::Identity).unwrap();
        let s = bits(&[1, 1, 0, 1, 0, 0]);
        assert_eq!(c.simulate(&s).unwrap().outputs, d.simulate(&s).unwrap().outputs);
    }

    #[test]
    fn connecting_a_machine_to_itself_is_rejected() {
        let d = delay(ts(), 0);
        assert_eq!(connect(&d, &d, &Wiring::Identity), Err(SystemError::SelfWiring));
    }

    #[test]
    fn uncovered_wiring_is_a_type_mismatch() {
        let m = Wiring::Map(vec![(Value::Int(0), Value::Int(1))]);
        assert!(matches!(
            connect(&identity(ts()), &delay(ts(), 0), &m),
            Err(SystemError::TypeMismatch(_))
        ));
    }

    #[test]
    fn mismatched_time_scales_are_rejected() {
        let other = TimeScale::new(3).unwrap();
        assert_eq!(
            product(&delay(ts(), 0), &delay(other, 0)),
            Err(SystemError::TimeScaleMismatch)
        );
    }

    #[test]
    fn delay_fed_back_holds_its_seed() {
        let d = delay(ts(), 1);
        let wrapped = MealySystem::from_fn(
            ts(),
            DataSet::new(bits(&[0, 1]).into_iter().map(|b| Value::Tuple(vec![b]))).unwrap(),
            DataSet::new(bits(&[0, 1]).into_iter().map(|b| Value::Tuple(vec![b]))).unwrap(),
            d.states().clone(),
            Value::Int(1),
            |i, s, t| {
                let (o, n) = d.step(s, &i.components()[0], t).unwrap();
                (Value::Tuple(vec![o]), n)
            },
        )
        .unwrap();
        let closed = feedback(&wrapped, FeedbackLoop { output: 0, input: 0 }).unwrap();
        let units = vec![Value::unit(); 5];
        assert_eq!(closed.simulate(&units).unwrap().outputs, vec![Value::unit(); 5]);
        let states = closed.simulate(&units).unwrap().states;
        assert!(states.iter().all(|s| *s == Value::Int(1)));
    }

    #[test]
    fn delay_and_inverter_loop_toggles() {
        // Inverter that also reports its input: (not b, b).
        let inv = MealySystem::stateless(ts(), DataSet::bits(), DataSet::bits().product(&DataSet::bits()), |b| {
            let v = b.as_int().unwrap();
            Value::pair(Value::Int(1 - v), Value::Int(v))
        })
        .unwrap();
        let d = delay(ts(), 0);
        let loop_body = connect(&d, &inv, &Wiring::Identity).unwrap();
        let loop_body = MealySystem::from_fn(
            ts(),
            DataSet::new(bits(&[0, 1]).into_iter().map(|b| Value::Tuple(vec![b]))).unwrap(),
            loop_body.output().clone(),
            loop_body.states().clone(),
            loop_body.initial().clone(),
            |i, s, t| loop_body.step(s, &i.components()[0], t).unwrap(),
        )
        .unwrap();
        let closed = feedback(&loop_body, FeedbackLoop { output: 0, input: 0 }).unwrap();
        let out = closed.simulate(&vec![Value::unit(); 4]).unwrap().outputs;
        assert_eq!(out, bits(&[0, 1, 0, 1]));
    }

    #[test]
    fn instantaneous_loop_is_rejected() {
        // The output depends on the same-step input: no delay in the loop.
        let n = nand(ts());
        assert_eq!(
            feedback(&n, FeedbackLoop { output: 0, input: 0 }),
            Err(SystemError::AlgebraicLoop)
        );
    }
}
