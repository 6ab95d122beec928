//! Splitting a machine into two stages whose recomposition reproduces it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::compose::{connect, product, Wiring};
use super::equivalence::equivalent;
use super::library;
use super::machine::{DataSet, MealySystem, TimeScale, Value};
use super::SystemError;

/// Where to cut a machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    /// Inputs, outputs, and states are pairs handled by two independent
    /// halves. `state_map` sends each state to its pair of half-states; when
    /// absent the states must already be pairs.
    Product {
        #[serde(default)]
        state_map: Option<Vec<(Value, (Value, Value))>>,
    },
    /// A given stateless front stage followed by a derived back stage.
    Series { front: MealySystem, wiring: Wiring },
}

impl Split {
    /// Rebuilds the whole from the two stages this split produced.
    pub fn recompose(&self, y: &MealySystem, z: &MealySystem) -> Result<MealySystem, SystemError> {
        match self {
            Split::Product { .. } => product(y, z),
            Split::Series { wiring, .. } => connect(y, z, wiring),
        }
    }
}

fn invalid(msg: impl Into<String>) -> SystemError {
    SystemError::InvalidPartition(msg.into())
}

fn halves(v: &Value, what: &str) -> Result<(Value, Value), SystemError> {
    match v {
        Value::Tuple(items) if items.len() == 2 => Ok((items[0].clone(), items[1].clone())),
        _ => Err(invalid(format!("{what} {v} is not a pair"))),
    }
}

/// Table under construction; each (input, state, time) may be set once.
struct Partial {
    time: TimeScale,
    input: DataSet,
    output: DataSet,
    states: DataSet,
    entries: BTreeMap<(usize, usize, u32), (usize, usize)>,
}

impl Partial {
    fn new(time: TimeScale, input: DataSet, output: DataSet, states: DataSet) -> Self {
        Partial {
            time,
            input,
            output,
            states,
            entries: BTreeMap::new(),
        }
    }

    fn set(&mut self, i: &Value, s: &Value, t: u32, o: &Value, n: &Value) -> Result<(), SystemError> {
        let key = (
            self.input.index_of(i).expect("input of part"),
            self.states.index_of(s).expect("state of part"),
            t,
        );
        let val = (
            self.output.index_of(o).expect("output of part"),
            self.states.index_of(n).expect("state of part"),
        );
        match self.entries.insert(key, val) {
            Some(prev) if prev != val => Err(invalid(format!(
                "behaviour at input {i}, state {s}, time {t} depends on the other part"
            ))),
            _ => Ok(()),
        }
    }

    /// Unconstrained entries emit the first output and keep their state.
    fn finish(self, initial: &Value) -> MealySystem {
        let init = self.states.index_of(initial).expect("initial state of part");
        let entries = self.entries;
        MealySystem::from_indices(self.time, self.input, self.output, self.states, init, |i, s, t| {
            entries.get(&(i, s, t)).copied().unwrap_or((0, s))
        })
    }
}

/// Splits `x` according to `split` and checks that recomposing the parts is
/// equivalent to `x` over its whole horizon.
pub fn decompose(x: &MealySystem, split: &Split) -> Result<(MealySystem, MealySystem), SystemError> {
    let (y, z) = match split {
        Split::Product { state_map } => split_product(x, state_map.as_ref())?,
        Split::Series { front, wiring } => split_series(x, front, wiring)?,
    };
    let whole = split.recompose(&y, &z)?;
    if !equivalent(&whole, x, x.horizon())? {
        return Err(invalid("recomposed parts do not reproduce the machine"));
    }
    Ok((y, z))
}

fn split_product(
    x: &MealySystem,
    state_map: Option<&Vec<(Value, (Value, Value))>>,
) -> Result<(MealySystem, MealySystem), SystemError> {
    let ins: Vec<(Value, Value)> = x
        .input()
        .values()
        .iter()
        .map(|v| halves(v, "input"))
        .collect::<Result<_, _>>()?;
    let outs: Vec<(Value, Value)> = x
        .output()
        .values()
        .iter()
        .map(|v| halves(v, "output"))
        .collect::<Result<_, _>>()?;
    let states: BTreeMap<Value, (Value, Value)> = match state_map {
        Some(pairs) => {
            let m: BTreeMap<Value, (Value, Value)> = pairs.iter().cloned().collect();
            if m.len() != pairs.len() || x.states().values().iter().any(|s| !m.contains_key(s)) {
                return Err(invalid("state map must assign every state exactly once"));
            }
            m
        }
        None => x
            .states()
            .values()
            .iter()
            .map(|s| Ok((s.clone(), halves(s, "state")?)))
            .collect::<Result<_, SystemError>>()?,
    };
    let in_y = DataSet::new(ins.iter().map(|p| p.0.clone()))?;
    let in_z = DataSet::new(ins.iter().map(|p| p.1.clone()))?;
    if in_y.len() * in_z.len() != ins.len() {
        return Err(invalid("inputs are not a full product of two alphabets"));
    }
    let out_y = DataSet::new(outs.iter().map(|p| p.0.clone()))?;
    let out_z = DataSet::new(outs.iter().map(|p| p.1.clone()))?;
    let st_y = DataSet::new(states.values().map(|p| p.0.clone()))?;
    let st_z = DataSet::new(states.values().map(|p| p.1.clone()))?;

    let mut y = Partial::new(x.time(), in_y, out_y, st_y);
    let mut z = Partial::new(x.time(), in_z, out_z, st_z);
    for (ii, (a, b)) in ins.iter().enumerate() {
        for (si, s) in x.states().values().iter().enumerate() {
            let (p, q) = &states[s];
            for t in 0..=x.horizon() {
                let (o, n) = x.step_idx(ii, si, t);
                let (oa, ob) = &outs[o];
                let (np, nq) = &states[&x.states().values()[n]];
                y.set(a, p, t, oa, np)?;
                z.set(b, q, t, ob, nq)?;
            }
        }
    }
    let (p0, q0) = &states[x.initial()];
    Ok((y.finish(p0), z.finish(q0)))
}

fn split_series(
    x: &MealySystem,
    front: &MealySystem,
    wiring: &Wiring,
) -> Result<(MealySystem, MealySystem), SystemError> {
    if front.states().len() != 1 {
        return Err(invalid("the front stage of a series split must be stateless"));
    }
    if front.input() != x.input() {
        return Err(SystemError::SignatureMismatch);
    }
    if front.time() != x.time() {
        return Err(SystemError::TimeScaleMismatch);
    }
    let translate: BTreeMap<Value, Value> = match wiring {
        Wiring::Identity => front
            .output()
            .values()
            .iter()
            .map(|v| (v.clone(), v.clone()))
            .collect(),
        Wiring::Map(pairs) => pairs.iter().cloned().collect(),
    };
    let mid = front
        .output()
        .values()
        .iter()
        .map(|o| {
            translate
                .get(o)
                .cloned()
                .ok_or_else(|| SystemError::TypeMismatch(format!("wiring does not cover output {o}")))
        })
        .collect::<Result<Vec<Value>, _>>()?;
    let mut back = Partial::new(
        x.time(),
        DataSet::new(mid.iter().cloned())?,
        x.output().clone(),
        x.states().clone(),
    );
    for (ii, iv) in x.input().values().iter().enumerate() {
        for (si, s) in x.states().values().iter().enumerate() {
            for t in 0..=x.horizon() {
                let (fo, _) = front.step_idx(ii, 0, t);
                let (o, n) = x.step_idx(ii, si, t);
                back.set(&mid[fo], s, t, &x.output().values()[o], &x.states().values()[n])
                    .map_err(|_| {
                        invalid(format!(
                            "the front stage loses information the machine needs at input {iv}"
                        ))
                    })?;
            }
        }
    }
    Ok((front.clone(), back.finish(x.initial())))
}

/// A machine with a split that is known to work.
#[derive(Debug, Clone)]
pub struct DecompositionCase {
    pub name: &'static str,
    pub machine: MealySystem,
    pub split: Split,
}

fn gate_pair_front(ts: TimeScale, f: impl Fn(i64, i64) -> Value, out: DataSet) -> MealySystem {
    MealySystem::stateless(ts, DataSet::bits().product(&DataSet::bits()), out, |v| {
        let c = v.components();
        f(c[0].as_int().expect("bit"), c[1].as_int().expect("bit"))
    })
    .expect("front stage")
}

/// The stock set of decomposition cases.
pub fn shipped_decompositions(ts: TimeScale) -> Vec<DecompositionCase> {
    let prod = |a: MealySystem, b: MealySystem| product(&a, &b).expect("same time scale");
    let ser = |a: MealySystem, b: MealySystem| connect(&a, &b, &Wiring::Identity).expect("typed");
    let bits2 = DataSet::bits().product(&DataSet::bits());
    let mut cases = Vec::new();

    let m = prod(library::identity(ts), library::delay(ts, 0));
    cases.push(DecompositionCase { name: "identity-with-delay", split: Split::Product { state_map: None }, machine: m });
    let m = prod(library::delay(ts, 0), library::delay(ts, 1));
    cases.push(DecompositionCase { name: "two-delays", split: Split::Product { state_map: None }, machine: m });
    let m = prod(library::nand(ts), library::not(ts));
    cases.push(DecompositionCase { name: "nand-with-not", split: Split::Product { state_map: None }, machine: m });
    let m = prod(library::counter(ts, 3), library::identity(ts));
    cases.push(DecompositionCase { name: "counter-with-identity", split: Split::Product { state_map: None }, machine: m });

    // Parity and delay sharing one flat state space of four symbols.
    let pd = prod(library::parity(ts), library::delay(ts, 0));
    let names = ["s0", "s1", "s2", "s3"];
    let to_flat: BTreeMap<Value, Value> = pd
        .states()
        .values()
        .iter()
        .zip(names)
        .map(|(s, n)| (s.clone(), Value::sym(n)))
        .collect();
    let flat = MealySystem::from_fn(
        ts,
        pd.input().clone(),
        pd.output().clone(),
        DataSet::new(names.iter().map(|n| Value::sym(n))).expect("names"),
        to_flat[pd.initial()].clone(),
        |i, s, t| {
            let pair = to_flat.iter().find(|(_, f)| *f == s).expect("flat state").0;
            let (o, n) = pd.step(pair, i, t).expect("in domain");
            (o, to_flat[&n].clone())
        },
    )
    .expect("flat machine");
    let state_map = to_flat
        .iter()
        .map(|(pair, f)| (f.clone(), halves(pair, "state").expect("pair")))
        .collect();
    cases.push(DecompositionCase {
        name: "parity-with-delay-flat-states",
        machine: flat,
        split: Split::Product { state_map: Some(state_map) },
    });

    let nand = library::nand(ts);
    cases.push(DecompositionCase {
        name: "and-after-nand",
        machine: library::and(ts),
        split: Split::Series { front: nand, wiring: Wiring::Identity },
    });
    let inverted = gate_pair_front(ts, |a, b| Value::pair(Value::Int(1 - a), Value::Int(1 - b)), bits2.clone());
    cases.push(DecompositionCase {
        name: "or-after-inverted-pair",
        machine: library::or(ts),
        split: Split::Series { front: inverted, wiring: Wiring::Identity },
    });
    cases.push(DecompositionCase {
        name: "delayed-inverse",
        machine: ser(library::not(ts), library::delay(ts, 0)),
        split: Split::Series { front: library::not(ts), wiring: Wiring::Identity },
    });
    let or_nand = gate_pair_front(ts, |a, b| Value::pair(Value::Int(a | b), Value::Int(1 - (a & b))), bits2);
    cases.push(DecompositionCase {
        name: "xor-after-or-nand",
        machine: library::xor(ts),
        split: Split::Series { front: or_nand, wiring: Wiring::Identity },
    });
    let tag = |b: &Value| Value::sym(if b.as_int() == Some(1) { "hi" } else { "lo" });
    let tagger = MealySystem::stateless(
        ts,
        DataSet::bits(),
        DataSet::new([Value::sym("hi"), Value::sym("lo")]).expect("tags"),
        tag,
    )
    .expect("tagger");
    cases.push(DecompositionCase {
        name: "alternator-after-tagging",
        machine: library::alternator(ts),
        split: Split::Series { front: tagger, wiring: Wiring::Identity },
    });
    cases
}
