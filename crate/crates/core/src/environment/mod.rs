//! Deterministic reward environments and the two shipped design domains.

pub mod circuit;
mod compile;
mod model;
pub mod pipeline;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use compile::{compile_concept, scenario_holds, Compiled, PortLabel, Role};
pub use model::{env_evaluate, spread, terminal_reward, EnvironmentModel, ModelSet};

use crate::language::{Alphabet, RuleSet};
use crate::verification::RequirementSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("unknown component kind {0}")]
    UnknownKind(String),
    #[error("mandatory port {0} is not driven")]
    DanglingPort(String),
    #[error("port {0} has more than one driver")]
    MultipleDrivers(String),
    #[error("wiring contains a loop")]
    CombinationalLoop,
    #[error("type mismatch on {0}")]
    TypeMismatch(String),
    #[error("{count} open inputs exceed the limit of {limit}")]
    TooManyInputs { count: usize, limit: usize },
    #[error("malformed concept: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("model {model} produced reward {reward} outside its declared range")]
    Contract { model: String, reward: f64 },
    #[error("invalid environment: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Circuit,
    Pipeline,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Circuit => "circuit",
            DomainKind::Pipeline => "pipeline",
        })
    }
}

impl FromStr for DomainKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "circuit" => Ok(DomainKind::Circuit),
            "pipeline" => Ok(DomainKind::Pipeline),
            other => Err(format!("unknown domain {other}")),
        }
    }
}

impl DomainKind {
    pub fn alphabet(self) -> Alphabet {
        match self {
            DomainKind::Circuit => circuit::alphabet(),
            DomainKind::Pipeline => pipeline::alphabet(),
        }
    }

    pub fn rules(self) -> RuleSet {
        match self {
            DomainKind::Circuit => circuit::rules(),
            DomainKind::Pipeline => pipeline::rules(),
        }
    }

    pub fn requirements(self) -> RequirementSet {
        match self {
            DomainKind::Circuit => circuit::half_adder_requirements(),
            DomainKind::Pipeline => pipeline::default_requirements(),
        }
    }

    /// The shipped pair of equally weighted models.
    pub fn models(self) -> ModelSet {
        let model = |id: &str, costs: &[(&str, f64)], expansion_cost: f64| EnvironmentModel {
            id: id.to_string(),
            weight: 0.5,
            cost_per_kind: costs.iter().map(|(k, c)| (k.to_string(), *c)).collect::<BTreeMap<_, _>>(),
            expansion_cost,
        };
        let set = match self {
            DomainKind::Circuit => ModelSet {
                domain: self,
                horizon: 12,
                compile_horizon: 1,
                reward_range: (-50.0, 8.0),
                shaping: false,
                requirements: self.requirements(),
                models: vec![
                    model("frugal", &[(circuit::GATE, 0.1)], 1e-4),
                    model("strict", &[(circuit::GATE, 0.2)], 2e-4),
                ],
            },
            DomainKind::Pipeline => {
                let stages = |c: f64| -> Vec<(&str, f64)> { pipeline::STAGES.iter().map(|s| (s.0, c)).collect() };
                ModelSet {
                    domain: self,
                    horizon: 8,
                    compile_horizon: 4,
                    reward_range: (-10.0, 6.0),
                    shaping: false,
                    requirements: self.requirements(),
                    models: vec![
                        model("frugal", &stages(0.05), 1e-3),
                        model("strict", &stages(0.1), 2e-3),
                    ],
                }
            }
        };
        set.validate().expect("shipped models are valid");
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::Concept;

    #[test]
    fn half_adder_earns_seven_and_a_half() {
        let set = DomainKind::Circuit.models();
        let frugal = set.model("frugal").unwrap();
        let stream = env_evaluate(&set, frugal, &circuit::half_adder()).unwrap();
        assert_eq!(stream.len(), 12);
        assert_eq!(stream[0], 8.0 - 5.0 * 0.1);
        assert!(stream[1..].iter().all(|r| *r == 0.0));
    }

    #[test]
    fn empty_concept_earns_a_zero_stream() {
        for d in [DomainKind::Circuit, DomainKind::Pipeline] {
            let set = d.models();
            for m in &set.models {
                assert!(env_evaluate(&set, m, &Concept::empty()).unwrap().iter().all(|r| *r == 0.0));
            }
        }
    }

    #[test]
    fn type_mismatch_earns_nothing() {
        let set = DomainKind::Pipeline.models();
        let c = Concept::build(
            &[("s", "source"), ("f", "show"), ("g", "inc")],
            &[(("s", "o"), ("f", "i")), (("f", "o"), ("g", "i"))],
        )
        .unwrap();
        let stream = env_evaluate(&set, &set.models[0], &c).unwrap();
        assert!(stream.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn out_of_domain_concept_is_an_error() {
        let set = DomainKind::Circuit.models();
        let c = Concept::build(&[("m", "source")], &[]).unwrap();
        assert!(matches!(
            terminal_reward(&set, &set.models[0], &c),
            Err(EnvError::Compile(CompileError::UnknownKind(_)))
        ));
    }

    #[test]
    fn reward_outside_range_breaks_the_contract() {
        let mut set = DomainKind::Circuit.models();
        set.reward_range = (-0.1, 8.0);
        let lonely = Concept::build(&[("g", circuit::GATE), ("h", circuit::GATE)], &[]).unwrap();
        let strict = set.model("strict").unwrap().clone();
        assert!(matches!(
            terminal_reward(&set, &strict, &lonely),
            Err(EnvError::Contract { .. })
        ));
    }

    #[test]
    fn shaping_spreads_without_changing_the_total() {
        let mut set = DomainKind::Circuit.models();
        set.shaping = true;
        let s = spread(&set, 6.0, 8);
        assert_eq!(s.iter().filter(|v| **v != 0.0).count(), 4);
        assert_eq!(s.iter().sum::<f64>(), 6.0);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut set = DomainKind::Circuit.models();
        set.models[0].weight = 0.7;
        assert!(set.validate().is_err());
    }
}
