use std::collections::BTreeSet;

use super::machine::MealySystem;
use super::SystemError;

/// Default bound on `|In|^horizon` accepted by [`equivalent`].
pub const DEFAULT_STREAM_CEILING: u64 = 1 << 24;

/// Same input alphabet and identical outputs on every input stream of length
/// `horizon`, starting from the initial states.
pub fn equivalent(a: &MealySystem, b: &MealySystem, horizon: u32) -> Result<bool, SystemError> {
    equivalent_with_ceiling(a, b, horizon, DEFAULT_STREAM_CEILING)
}

pub fn equivalent_with_ceiling(
    a: &MealySystem,
    b: &MealySystem,
    horizon: u32,
    ceiling: u64,
) -> Result<bool, SystemError> {
    if a.input() != b.input() {
        return Err(SystemError::SignatureMismatch);
    }
    if horizon > a.horizon() || horizon > b.horizon() {
        return Err(SystemError::OutOfDomain(format!("horizon {horizon}")));
    }
    let streams = (a.input().len() as u64).checked_pow(horizon);
    if streams.is_none_or(|n| n > ceiling) {
        return Err(SystemError::BudgetExceeded { ceiling });
    }
    // Walk the reachable pairs of states; both machines see the same input.
    let mut frontier: BTreeSet<(usize, usize)> = BTreeSet::from([(a.initial_idx(), b.initial_idx())]);
    for t in 0..horizon {
        let mut next = BTreeSet::new();
        for &(sa, sb) in &frontier {
            for i in 0..a.input().len() {
                let (oa, na) = a.step_idx(i, sa, t);
                let (ob, nb) = b.step_idx(i, sb, t);
                if a.output().values()[oa] != b.output().values()[ob] {
                    return Ok(false);
                }
                next.insert((na, nb));
            }
        }
        frontier = next;
    }
    Ok(true)
}
