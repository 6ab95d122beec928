use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::compile::{compile_concept, scenario_holds};
use super::{CompileError, DomainKind, EnvError};
use crate::hash::{content_hash, ContentHash};
use crate::language::Concept;
use crate::system::TimeScale;
use crate::verification::{Location, RequirementSet};

/// One deterministic simulator of the outside world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentModel {
    pub id: String,
    pub weight: f64,
    /// Charge per node of each kind, subtracted from a submission's reward.
    #[serde(default)]
    pub cost_per_kind: BTreeMap<String, f64>,
    /// Charge per expansion spent by the exploratory search.
    #[serde(default)]
    pub expansion_cost: f64,
}

impl EnvironmentModel {
    pub fn cost(&self, c: &Concept) -> f64 {
        // Per-kind products summed in kind order, so the value is stable.
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for n in c.nodes().values() {
            *counts.entry(n.kind.as_str()).or_default() += 1;
        }
        counts
            .iter()
            .map(|(k, n)| self.cost_per_kind.get(*k).copied().unwrap_or(0.0) * *n as f64)
            .sum()
    }
}

/// The declared set of environment models with their shared requirements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSet")]
pub struct ModelSet {
    pub domain: DomainKind,
    /// Rounds per episode.
    pub horizon: u32,
    /// Horizon of the machines concepts compile to.
    pub compile_horizon: u32,
    pub reward_range: (f64, f64),
    /// Spread each submission reward evenly over the episode instead of
    /// paying it at once.
    #[serde(default)]
    pub shaping: bool,
    pub requirements: RequirementSet,
    pub models: Vec<EnvironmentModel>,
}

#[derive(Deserialize)]
struct RawModelSet {
    domain: DomainKind,
    horizon: u32,
    compile_horizon: u32,
    reward_range: (f64, f64),
    #[serde(default)]
    shaping: bool,
    requirements: RequirementSet,
    models: Vec<EnvironmentModel>,
}

impl TryFrom<RawModelSet> for ModelSet {
    type Error = EnvError;
    fn try_from(r: RawModelSet) -> Result<Self, EnvError> {
        let m = ModelSet {
            domain: r.domain,
            horizon: r.horizon,
            compile_horizon: r.compile_horizon,
            reward_range: r.reward_range,
            shaping: r.shaping,
            requirements: r.requirements,
            models: r.models,
        };
        m.validate()?;
        Ok(m)
    }
}

/// Tolerance on the sum of model weights.
const WEIGHT_TOLERANCE: f64 = 1e-9;

impl ModelSet {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: &str| Err(EnvError::Invalid(m.to_string()));
        if self.models.is_empty() {
            return bad("at least one environment model is required");
        }
        if self.horizon == 0 || self.compile_horizon == 0 {
            return bad("horizons must be at least 1");
        }
        if self.requirements.location() != Location::EnvironmentHeld {
            return bad("environment requirements must be environment-held");
        }
        let (lo, hi) = self.reward_range;
        if lo.is_nan() || hi.is_nan() || lo > 0.0 || hi < 0.0 {
            return bad("reward range must contain zero");
        }
        let mut ids = std::collections::BTreeSet::new();
        for m in &self.models {
            if !ids.insert(&m.id) {
                return Err(EnvError::Invalid(format!("duplicate model id {}", m.id)));
            }
            if !(m.weight >= 0.0 && m.weight.is_finite()) || !m.expansion_cost.is_finite() {
                return Err(EnvError::Invalid(format!("model {} has invalid parameters", m.id)));
            }
        }
        let total: f64 = self.models.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(EnvError::Invalid(format!("model weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn hash(&self) -> ContentHash {
        content_hash(self)
    }

    pub fn time(&self) -> TimeScale {
        TimeScale::new(self.compile_horizon).expect("validated horizon")
    }

    pub fn model(&self, id: &str) -> Option<&EnvironmentModel> {
        self.models.iter().find(|m| m.id == id)
    }

    /// Same set with a single model of weight one.
    pub fn only(&self, id: &str) -> Option<ModelSet> {
        let m = self.model(id)?;
        Some(ModelSet {
            models: vec![EnvironmentModel { weight: 1.0, ..m.clone() }],
            ..self.clone()
        })
    }

    /// Weighted sum of per-model values, in model order.
    pub fn expectation(&self, per_model: &[f64]) -> f64 {
        self.models.iter().zip(per_model).map(|(m, v)| m.weight * v).sum()
    }
}

/// Reward a model pays for submitting `c`: satisfied requirement weights
/// minus the model's cost. The empty concept and concepts without a valid
/// behaviour earn nothing; unknown component kinds are an error.
pub fn terminal_reward(set: &ModelSet, model: &EnvironmentModel, c: &Concept) -> Result<f64, EnvError> {
    if c.is_empty() {
        return Ok(0.0);
    }
    let compiled = match compile_concept(c, set.domain, set.time()) {
        Ok(x) => x,
        Err(e @ CompileError::UnknownKind(_)) => return Err(EnvError::Compile(e)),
        Err(_) => return Ok(0.0),
    };
    let satisfied: f64 = set
        .requirements
        .requirements()
        .iter()
        .filter(|r| scenario_holds(&compiled, &r.scenario))
        .map(|r| r.weight)
        .sum();
    let reward = satisfied - model.cost(c);
    let (lo, hi) = set.reward_range;
    if !(lo..=hi).contains(&reward) {
        return Err(EnvError::Contract {
            model: model.id.clone(),
            reward,
        });
    }
    Ok(reward)
}

/// Reward stream of `horizon` entries for submitting `c` at step 0.
pub fn env_evaluate(set: &ModelSet, model: &EnvironmentModel, c: &Concept) -> Result<Vec<f64>, EnvError> {
    let r = terminal_reward(set, model, c)?;
    Ok(spread(set, r, 0))
}

/// Places reward `r` earned at `step` into a stream of `set.horizon` entries.
pub fn spread(set: &ModelSet, r: f64, step: u32) -> Vec<f64> {
    let n = set.horizon as usize;
    let mut out = vec![0.0; n];
    if set.shaping {
        let rest = n - (step as usize).min(n - 1);
        let share = r / rest as f64;
        for v in out.iter_mut().skip(n - rest) {
            *v = share;
        }
    } else {
        out[(step as usize).min(n - 1)] = r;
    }
    out
}
