//! Checking concepts against requirements, both as the environment scores
//! them and as the machine itself expects them to be scored.

mod requirements;

pub use requirements::{Location, Requirement, RequirementSet, Scenario};

use crate::environment::{compile_concept, scenario_holds, terminal_reward, CompileError, EnvError, EnvironmentModel, ModelSet};
use crate::language::Concept;

/// Agreement score at or below which a requirement is dropped.
pub const DROP_THRESHOLD: i64 = -3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Environment(#[from] EnvError),
    #[error("expected a {expected:?} requirement set")]
    WrongLocation { expected: Location },
}

/// Which requirements of `set` the concept satisfies, in set order.
pub fn satisfied(c: &Concept, set: &RequirementSet, env: &ModelSet) -> Result<Vec<bool>, CompileError> {
    let compiled = compile_concept(c, env.domain, env.time())?;
    Ok(set
        .requirements()
        .iter()
        .map(|r| scenario_holds(&compiled, &r.scenario))
        .collect())
}

/// Sum of satisfied requirement weights minus the model's cost.
pub fn verify_external(
    c: &Concept,
    phi: &RequirementSet,
    env: &ModelSet,
    model: &EnvironmentModel,
) -> Result<f64, VerifyError> {
    if phi.location() != Location::EnvironmentHeld {
        return Err(VerifyError::WrongLocation {
            expected: Location::EnvironmentHeld,
        });
    }
    if c.is_empty() {
        return Ok(0.0);
    }
    let sat = satisfied(c, phi, env)?;
    let gained: f64 = phi
        .requirements()
        .iter()
        .zip(&sat)
        .filter(|(_, s)| **s)
        .map(|(r, _)| r.weight)
        .sum();
    Ok(gained - model.cost(c))
}

/// Expected reward over the models for submitting `c`.
fn expected_reward(c: &Concept, env: &ModelSet) -> Result<f64, VerifyError> {
    let per_model = env
        .models
        .iter()
        .map(|m| terminal_reward(env, m, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(env.expectation(&per_model))
}

/// Expected reward for submitting `c` while asserting `phi`: zero unless the
/// concept satisfies `phi`.
pub fn utility_cpe(c: &Concept, phi: &Requirement, env: &ModelSet) -> Result<f64, VerifyError> {
    if c.is_empty() {
        return Ok(0.0);
    }
    let compiled = compile_concept(c, env.domain, env.time())?;
    if !scenario_holds(&compiled, &phi.scenario) {
        return Ok(0.0);
    }
    expected_reward(c, env)
}

/// Unnormalized internal verification: the weighted sum of conditional
/// utilities.
pub fn verify_internal_raw(c: &Concept, phi: &RequirementSet, env: &ModelSet) -> Result<f64, VerifyError> {
    if phi.location() != Location::MachineInternal {
        return Err(VerifyError::WrongLocation {
            expected: Location::MachineInternal,
        });
    }
    if phi.is_empty() || c.is_empty() {
        return Ok(0.0);
    }
    let sat = satisfied(c, phi, env)?;
    let mut weight = 0.0;
    for (r, s) in phi.requirements().iter().zip(&sat) {
        if *s {
            weight += r.weight;
        }
    }
    if weight == 0.0 {
        return Ok(0.0);
    }
    Ok(weight * expected_reward(c, env)?)
}

/// Internal verification with weights normalized to sum to one.
pub fn verify_internal(c: &Concept, phi: &RequirementSet, env: &ModelSet) -> Result<f64, VerifyError> {
    let total = phi.total_weight();
    if total == 0.0 {
        if phi.location() != Location::MachineInternal {
            return Err(VerifyError::WrongLocation {
                expected: Location::MachineInternal,
            });
        }
        return Ok(0.0);
    }
    Ok(verify_internal_raw(c, phi, env)? / total)
}

/// Scores each internal requirement against the observed reward for `c`.
/// A requirement agrees when the observed reward is at least the share it
/// predicted (its weight if `c` satisfies it, zero otherwise). Environment
/// sets are returned unchanged.
pub fn revise_requirements(
    phi: &RequirementSet,
    observed: f64,
    c: &Concept,
    env: &ModelSet,
) -> Result<RequirementSet, VerifyError> {
    if phi.location() != Location::MachineInternal {
        return Ok(phi.clone());
    }
    let sat = match satisfied(c, phi, env) {
        Ok(s) => s,
        Err(e @ CompileError::UnknownKind(_)) => return Err(e.into()),
        Err(_) => vec![false; phi.len()],
    };
    let mut next = phi.clone();
    let reqs = next.requirements_mut();
    for (r, s) in reqs.iter_mut().zip(sat) {
        let predicted = if s { r.weight } else { 0.0 };
        r.score += if observed - predicted >= 0.0 { 1 } else { -1 };
    }
    reqs.retain(|r| r.score > DROP_THRESHOLD);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{circuit, DomainKind};

    fn single() -> ModelSet {
        DomainKind::Circuit.models().only("frugal").unwrap()
    }

    fn and_only() -> Concept {
        Concept::build(
            &[("a", "A"), ("b", "B"), ("g", "NAND"), ("h", "NAND"), ("c", "C"), ("s", "S")],
            &[
                (("a", "o"), ("g", "x")),
                (("b", "o"), ("g", "y")),
                (("g", "z"), ("h", "x")),
                (("g", "z"), ("h", "y")),
                (("h", "z"), ("c", "i")),
                (("h", "z"), ("s", "i")),
            ],
        )
        .unwrap()
    }

    #[test]
    fn half_adder_scores_seven_and_a_half() {
        let env = single();
        let r = verify_external(&circuit::half_adder(), &env.requirements, &env, &env.models[0]).unwrap();
        assert_eq!(r, 7.5);
    }

    #[test]
    fn and_circuit_scores_less() {
        let env = single();
        let r = verify_external(&and_only(), &env.requirements, &env, &env.models[0]).unwrap();
        // Carry is right on all four rows, sum only on (0, 0).
        assert_eq!(r, 5.0 - 0.2);
    }

    #[test]
    fn internal_equals_external_when_expectations_are_true() {
        let env = single();
        let internal = env.requirements.internal_copy();
        for c in [circuit::half_adder(), Concept::empty()] {
            let ext = verify_external(&c, &env.requirements, &env, &env.models[0]).unwrap();
            assert_eq!(verify_internal(&c, &internal, &env).unwrap(), ext);
        }
    }

    #[test]
    fn empty_internal_set_is_zero() {
        let env = single();
        let phi = RequirementSet::empty(Location::MachineInternal);
        assert_eq!(verify_internal(&circuit::half_adder(), &phi, &env).unwrap(), 0.0);
    }

    #[test]
    fn doubling_weights_doubles_the_raw_value() {
        let env = single();
        let phi = env.requirements.internal_copy();
        let c = and_only();
        let raw = verify_internal_raw(&c, &phi, &env).unwrap();
        assert_eq!(verify_internal_raw(&c, &phi.scaled(2.0), &env).unwrap(), 2.0 * raw);
        assert_eq!(verify_internal(&c, &phi.scaled(2.0), &env).unwrap(), verify_internal(&c, &phi, &env).unwrap());
    }

    #[test]
    fn asserting_the_wrong_table_earns_nothing() {
        let env = single();
        let wrong = Requirement::new(
            "s-11-wrong",
            Scenario::TruthRow {
                inputs: [("A".into(), 1), ("B".into(), 1)].into(),
                outputs: [("S".into(), 1)].into(),
            },
            1.0,
        );
        let right = &env.requirements.requirements()[0];
        let ha = circuit::half_adder();
        assert!(utility_cpe(&ha, right, &env).unwrap() > utility_cpe(&ha, &wrong, &env).unwrap());
    }

    #[test]
    fn agreement_increments_every_score() {
        let env = single();
        let phi = env.requirements.internal_copy();
        let next = revise_requirements(&phi, 7.5, &circuit::half_adder(), &env).unwrap();
        assert_eq!(next.len(), phi.len());
        assert!(next.requirements().iter().all(|r| r.score == 1));
    }

    #[test]
    fn three_contradictions_drop_a_requirement() {
        let env = single();
        let mut phi = env.requirements.internal_copy();
        for _ in 0..3 {
            // A negative observed reward contradicts every satisfied row.
            phi = revise_requirements(&phi, -1.0, &circuit::half_adder(), &env).unwrap();
        }
        assert!(phi.is_empty());
    }

    #[test]
    fn environment_sets_are_never_revised() {
        let env = single();
        let next = revise_requirements(&env.requirements, -5.0, &circuit::half_adder(), &env).unwrap();
        assert_eq!(next, env.requirements);
    }
}
