use std::fmt;

use serde::{Deserialize, Serialize};

use super::SystemError;

/// Atom carried on an input, output, or state alphabet. `Eps` is the
/// absence marker; tuples arise from products and multi-port components.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Eps,
    Int(i64),
    Sym(String),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn bit(b: bool) -> Self {
        Value::Int(b as i64)
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Tuple(vec![a, b])
    }

    pub fn unit() -> Self {
        Value::Tuple(Vec::new())
    }

    pub fn sym(s: &str) -> Self {
        Value::Sym(s.to_string())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    /// Components of a tuple; any other value is its own single component.
    pub fn components(&self) -> Vec<Value> {
        match self {
            Value::Tuple(items) => items.clone(),
            other => vec![other.clone()],
        }
    }

    /// Inverse of `components` for arity other than one.
    pub fn from_components(mut items: Vec<Value>) -> Value {
        if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            Value::Tuple(items)
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Eps => write!(f, "ε"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Tuple(items) => {
                write!(f, "(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Discrete time `0..=horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct TimeScale(u32);

impl TimeScale {
    pub fn new(horizon: u32) -> Result<Self, SystemError> {
        if horizon == 0 {
            return Err(SystemError::Malformed("time horizon must be at least 1".into()));
        }
        Ok(TimeScale(horizon))
    }

    pub fn horizon(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for TimeScale {
    type Error = SystemError;
    fn try_from(v: u32) -> Result<Self, Self::Error> {
        TimeScale::new(v)
    }
}

impl From<TimeScale> for u32 {
    fn from(t: TimeScale) -> u32 {
        t.0
    }
}

/// Finite, sorted, duplicate-free, non-empty set of values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Value>", into = "Vec<Value>")]
pub struct DataSet(Vec<Value>);

impl DataSet {
    pub fn new(values: impl IntoIterator<Item = Value>) -> Result<Self, SystemError> {
        let mut v: Vec<Value> = values.into_iter().collect();
        v.sort();
        v.dedup();
        if v.is_empty() {
            return Err(SystemError::Malformed("data set must be non-empty".into()));
        }
        Ok(DataSet(v))
    }

    pub fn bits() -> Self {
        DataSet(vec![Value::Int(0), Value::Int(1)])
    }

    pub fn ints(range: std::ops::Range<i64>) -> Result<Self, SystemError> {
        DataSet::new(range.map(Value::Int))
    }

    pub fn unit() -> Self {
        DataSet(vec![Value::unit()])
    }

    /// All pairs, in sorted order.
    pub fn product(&self, other: &DataSet) -> DataSet {
        let mut v = Vec::with_capacity(self.len() * other.len());
        for a in &self.0 {
            for b in &other.0 {
                v.push(Value::pair(a.clone(), b.clone()));
            }
        }
        DataSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.0.binary_search(v).ok()
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.index_of(v).is_some()
    }

    pub fn is_subset(&self, other: &DataSet) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }
}

impl TryFrom<Vec<Value>> for DataSet {
    type Error = SystemError;
    fn try_from(v: Vec<Value>) -> Result<Self, Self::Error> {
        let ds = DataSet::new(v.iter().cloned())?;
        if ds.0 != v {
            return Err(SystemError::Malformed("data set must be sorted and unique".into()));
        }
        Ok(ds)
    }
}

impl From<DataSet> for Vec<Value> {
    fn from(d: DataSet) -> Vec<Value> {
        d.0
    }
}

/// A timed Mealy machine with explicit, total output and next-state tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMachine", into = "RawMachine")]
pub struct MealySystem {
    time: TimeScale,
    input: DataSet,
    output: DataSet,
    states: DataSet,
    initial: usize,
    out_table: Vec<u32>,
    next_table: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawMachine {
    time: TimeScale,
    input: DataSet,
    output: DataSet,
    states: DataSet,
    initial: Value,
    /// Sorted by (input, state, time).
    rows: Vec<Row>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    input: Value,
    state: Value,
    time: u32,
    output: Value,
    next: Value,
}

impl TryFrom<RawMachine> for MealySystem {
    type Error = SystemError;

    fn try_from(raw: RawMachine) -> Result<Self, Self::Error> {
        let initial = raw
            .states
            .index_of(&raw.initial)
            .ok_or_else(|| SystemError::Malformed("initial state not in state set".into()))?;
        let slots = raw.input.len() * raw.states.len() * (raw.time.horizon() as usize + 1);
        if raw.rows.len() != slots {
            return Err(SystemError::Malformed(format!(
                "expected {slots} table rows, found {}",
                raw.rows.len()
            )));
        }
        let mut m = MealySystem {
            time: raw.time,
            input: raw.input,
            output: raw.output,
            states: raw.states,
            initial,
            out_table: vec![0; slots],
            next_table: vec![0; slots],
        };
        for (k, row) in raw.rows.iter().enumerate() {
            let i = m.input_index(&row.input)?;
            let s = m.state_index(&row.state)?;
            if row.time > m.time.horizon() || m.slot(i, s, row.time) != k {
                return Err(SystemError::Malformed("table rows out of order".into()));
            }
            m.out_table[k] = m.output_index(&row.output)? as u32;
            m.next_table[k] = m.state_index(&row.next)? as u32;
        }
        Ok(m)
    }
}

impl From<MealySystem> for RawMachine {
    fn from(m: MealySystem) -> Self {
        let mut rows = Vec::with_capacity(m.out_table.len());
        for i in 0..m.input.len() {
            for s in 0..m.states.len() {
                for t in 0..=m.time.horizon() {
                    let (o, n) = m.step_idx(i, s, t);
                    rows.push(Row {
                        input: m.input.values()[i].clone(),
                        state: m.states.values()[s].clone(),
                        time: t,
                        output: m.output.values()[o].clone(),
                        next: m.states.values()[n].clone(),
                    });
                }
            }
        }
        RawMachine {
            initial: m.states.values()[m.initial].clone(),
            time: m.time,
            input: m.input,
            output: m.output,
            states: m.states,
            rows,
        }
    }
}

/// Input stream, produced outputs, and visited states (initial state first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trace {
    pub inputs: Vec<Value>,
    pub outputs: Vec<Value>,
    pub states: Vec<Value>,
}

impl MealySystem {
    /// Builds the tables by evaluating `f(input, state, time) -> (output, next)`
    /// on every triple.
    pub fn from_fn<F>(
        time: TimeScale,
        input: DataSet,
        output: DataSet,
        states: DataSet,
        initial: Value,
        f: F,
    ) -> Result<Self, SystemError>
    where
        F: Fn(&Value, &Value, u32) -> (Value, Value),
    {
        let initial = states
            .index_of(&initial)
            .ok_or_else(|| SystemError::OutOfDomain(format!("initial state {initial}")))?;
        let slots = input.len() * states.len() * (time.horizon() as usize + 1);
        let mut out_table = Vec::with_capacity(slots);
        let mut next_table = Vec::with_capacity(slots);
        for i in input.values() {
            for s in states.values() {
                for t in 0..=time.horizon() {
                    let (o, n) = f(i, s, t);
                    let oi = output.index_of(&o).ok_or_else(|| {
                        SystemError::OutOfDomain(format!("output {o} at ({i}, {s}, {t})"))
                    })?;
                    let ni = states.index_of(&n).ok_or_else(|| {
                        SystemError::OutOfDomain(format!("next state {n} at ({i}, {s}, {t})"))
                    })?;
                    out_table.push(oi as u32);
                    next_table.push(ni as u32);
                }
            }
        }
        Ok(MealySystem {
            time,
            input,
            output,
            states,
            initial,
            out_table,
            next_table,
        })
    }

    /// Index-level constructor; `f(i, s, t) -> (o, n)` over set positions.
    pub(crate) fn from_indices<F>(
        time: TimeScale,
        input: DataSet,
        output: DataSet,
        states: DataSet,
        initial: usize,
        f: F,
    ) -> Self
    where
        F: Fn(usize, usize, u32) -> (usize, usize),
    {
        let slots = input.len() * states.len() * (time.horizon() as usize + 1);
        let mut out_table = Vec::with_capacity(slots);
        let mut next_table = Vec::with_capacity(slots);
        for i in 0..input.len() {
            for s in 0..states.len() {
                for t in 0..=time.horizon() {
                    let (o, n) = f(i, s, t);
                    debug_assert!(o < output.len() && n < states.len());
                    out_table.push(o as u32);
                    next_table.push(n as u32);
                }
            }
        }
        MealySystem {
            time,
            input,
            output,
            states,
            initial,
            out_table,
            next_table,
        }
    }

    /// A machine with a single state whose output depends only on the input.
    pub fn stateless<F>(
        time: TimeScale,
        input: DataSet,
        output: DataSet,
        f: F,
    ) -> Result<Self, SystemError>
    where
        F: Fn(&Value) -> Value,
    {
        MealySystem::from_fn(time, input, output, DataSet::unit(), Value::unit(), |i, s, _| {
            (f(i), s.clone())
        })
    }

    pub fn time(&self) -> TimeScale {
        self.time
    }

    pub fn horizon(&self) -> u32 {
        self.time.horizon()
    }

    pub fn input(&self) -> &DataSet {
        &self.input
    }

    pub fn output(&self) -> &DataSet {
        &self.output
    }

    pub fn states(&self) -> &DataSet {
        &self.states
    }

    pub fn initial(&self) -> &Value {
        &self.states.values()[self.initial]
    }

    pub(crate) fn initial_idx(&self) -> usize {
        self.initial
    }

    fn slot(&self, i: usize, s: usize, t: u32) -> usize {
        (i * self.states.len() + s) * (self.time.horizon() as usize + 1) + t as usize
    }

    pub(crate) fn step_idx(&self, i: usize, s: usize, t: u32) -> (usize, usize) {
        let k = self.slot(i, s, t);
        (self.out_table[k] as usize, self.next_table[k] as usize)
    }

    fn input_index(&self, v: &Value) -> Result<usize, SystemError> {
        self.input
            .index_of(v)
            .ok_or_else(|| SystemError::OutOfDomain(format!("input {v}")))
    }

    fn state_index(&self, v: &Value) -> Result<usize, SystemError> {
        self.states
            .index_of(v)
            .ok_or_else(|| SystemError::OutOfDomain(format!("state {v}")))
    }

    fn output_index(&self, v: &Value) -> Result<usize, SystemError> {
        self.output
            .index_of(v)
            .ok_or_else(|| SystemError::OutOfDomain(format!("output {v}")))
    }

    /// One transition: `(F(i, s, t), Q(i, s, t))`.
    pub fn step(&self, s: &Value, i: &Value, t: u32) -> Result<(Value, Value), SystemError> {
        let si = self.state_index(s)?;
        let ii = self.input_index(i)?;
        if t > self.time.horizon() {
            return Err(SystemError::OutOfDomain(format!("time {t}")));
        }
        let (o, n) = self.step_idx(ii, si, t);
        Ok((self.output.values()[o].clone(), self.states.values()[n].clone()))
    }

    /// Runs from the initial state, consuming input `k` at time `k`.
    pub fn simulate(&self, inputs: &[Value]) -> Result<Trace, SystemError> {
        if inputs.len() > self.time.horizon() as usize {
            return Err(SystemError::OutOfDomain(format!(
                "stream of length {} exceeds horizon {}",
                inputs.len(),
                self.time.horizon()
            )));
        }
        let mut s = self.initial;
        let mut outputs = Vec::with_capacity(inputs.len());
        let mut states = Vec::with_capacity(inputs.len() + 1);
        states.push(self.states.values()[s].clone());
        for (t, v) in inputs.iter().enumerate() {
            let i = self.input_index(v)?;
            let (o, n) = self.step_idx(i, s, t as u32);
            outputs.push(self.output.values()[o].clone());
            states.push(self.states.values()[n].clone());
            s = n;
        }
        Ok(Trace {
            inputs: inputs.to_vec(),
            outputs,
            states,
        })
    }

    /// True when `F` and `Q` do not depend on time.
    pub fn is_time_invariant(&self) -> bool {
        (0..self.input.len()).all(|i| {
            (0..self.states.len()).all(|s| {
                let first = self.step_idx(i, s, 0);
                (1..=self.time.horizon()).all(|t| self.step_idx(i, s, t) == first)
            })
        })
    }
}
