//! Small stock machines over bits, used by tests, examples, and the
//! decomposition cases.

use super::machine::{DataSet, MealySystem, TimeScale, Value};

fn bit(v: &Value) -> i64 {
    v.as_int().expect("bit value")
}

fn pair_bits(v: &Value) -> (i64, i64) {
    let c = v.components();
    (bit(&c[0]), bit(&c[1]))
}

fn bit_pairs() -> DataSet {
    DataSet::bits().product(&DataSet::bits())
}

fn gate(ts: TimeScale, f: impl Fn(i64, i64) -> i64) -> MealySystem {
    MealySystem::stateless(ts, bit_pairs(), DataSet::bits(), |v| {
        let (a, b) = pair_bits(v);
        Value::Int(f(a, b))
    })
    .expect("bit gate")
}

pub fn identity(ts: TimeScale) -> MealySystem {
    MealySystem::stateless(ts, DataSet::bits(), DataSet::bits(), Clone::clone).expect("identity")
}

pub fn not(ts: TimeScale) -> MealySystem {
    MealySystem::stateless(ts, DataSet::bits(), DataSet::bits(), |v| Value::Int(1 - bit(v)))
        .expect("not")
}

/// Unit delay seeded with `init`: emits the previous input.
pub fn delay(ts: TimeScale, init: i64) -> MealySystem {
    MealySystem::from_fn(
        ts,
        DataSet::bits(),
        DataSet::bits(),
        DataSet::bits(),
        Value::Int(init),
        |i, s, _| (s.clone(), i.clone()),
    )
    .expect("delay")
}

pub fn nand(ts: TimeScale) -> MealySystem {
    gate(ts, |a, b| 1 - (a & b))
}

pub fn and(ts: TimeScale) -> MealySystem {
    gate(ts, |a, b| a & b)
}

pub fn or(ts: TimeScale) -> MealySystem {
    gate(ts, |a, b| a | b)
}

pub fn xor(ts: TimeScale) -> MealySystem {
    gate(ts, |a, b| a ^ b)
}

/// Counts ones modulo `m`; outputs the count before the current input.
pub fn counter(ts: TimeScale, m: i64) -> MealySystem {
    MealySystem::from_fn(
        ts,
        DataSet::bits(),
        DataSet::ints(0..m).expect("positive modulus"),
        DataSet::ints(0..m).expect("positive modulus"),
        Value::Int(0),
        |i, s, _| {
            let c = bit(s);
            (Value::Int(c), Value::Int((c + bit(i)) % m))
        },
    )
    .expect("counter")
}

/// Running parity, including the current input.
pub fn parity(ts: TimeScale) -> MealySystem {
    MealySystem::from_fn(
        ts,
        DataSet::bits(),
        DataSet::bits(),
        DataSet::bits(),
        Value::Int(0),
        |i, s, _| {
            let p = Value::Int(bit(s) ^ bit(i));
            (p.clone(), p)
        },
    )
    .expect("parity")
}

/// Passes input through at even times and inverts it at odd times.
pub fn alternator(ts: TimeScale) -> MealySystem {
    MealySystem::from_fn(
        ts,
        DataSet::bits(),
        DataSet::bits(),
        DataSet::unit(),
        Value::unit(),
        |i, s, t| {
            let b = bit(i);
            (Value::Int(if t % 2 == 0 { b } else { 1 - b }), s.clone())
        },
    )
    .expect("alternator")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts() -> TimeScale {
        TimeScale::new(4).unwrap()
    }

    fn run(m: &MealySystem, xs: &[i64]) -> Vec<i64> {
        let s: Vec<Value> = xs.iter().map(|&b| Value::Int(b)).collect();
        m.simulate(&s).unwrap().outputs.iter().map(|v| v.as_int().unwrap()).collect()
    }

    #[test]
    fn delay_shifts_by_one() {
        assert_eq!(run(&delay(ts(), 0), &[1, 0, 1, 1]), vec![0, 1, 0, 1]);
    }

    #[test]
    fn counter_wraps() {
        assert_eq!(run(&counter(ts(), 3), &[1, 1, 1, 1]), vec![0, 1, 2, 0]);
    }

    #[test]
    fn parity_accumulates() {
        assert_eq!(run(&parity(ts()), &[1, 1, 0, 1]), vec![1, 0, 0, 1]);
    }

    #[test]
    fn alternator_depends_on_time() {
        let a = alternator(ts());
        assert!(!a.is_time_invariant());
        assert_eq!(run(&a, &[1, 1, 0, 0]), vec![1, 0, 0, 1]);
        assert!(delay(ts(), 0).is_time_invariant());
    }
}
