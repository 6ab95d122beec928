use serde::{Deserialize, Serialize};

use super::action::DesignSequence;
use super::interpreter::ExploreParams;
use super::policy::default_policy;
use super::rank::UtilityParams;
use crate::environment::{DomainKind, ModelSet};
use crate::hash::{content_hash, ContentHash};
use crate::language::{Concept, RuleSet};
use crate::transform::{MetaRules, MetaUtility};
use crate::verification::RequirementSet;

/// Everything the machine is, serialized as one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineState {
    pub domain: DomainKind,
    pub rules: RuleSet,
    pub policy: Vec<DesignSequence>,
    pub explore: ExploreParams,
    pub utility: UtilityParams,
    pub meta: MetaRules,
    pub meta_utility: MetaUtility,
    /// The machine's own requirements.
    pub requirements: RequirementSet,
    /// Submitted concepts kept across episodes, in canonical form.
    pub concepts: Vec<Concept>,
    pub step: u64,
    pub reward: f64,
    pub seed: u64,
}

impl MachineState {
    pub fn initial(env: &ModelSet, seed: u64) -> Self {
        let requirements = env.requirements.internal_copy();
        MachineState {
            domain: env.domain,
            rules: env.domain.rules(),
            policy: default_policy(env.domain, &requirements),
            explore: ExploreParams::default(),
            utility: UtilityParams::for_domain(env.domain),
            meta: MetaRules::default(),
            meta_utility: MetaUtility::default(),
            requirements,
            concepts: Vec::new(),
            step: 0,
            reward: 0.0,
            seed,
        }
    }

    pub fn hash(&self) -> ContentHash {
        content_hash(self)
    }

    /// Hash of the parts only a certified switch may change: rules, policy,
    /// search and utility settings, and the meta level.
    pub fn program_hash(&self) -> ContentHash {
        content_hash(&(
            &self.rules,
            &self.policy,
            &self.explore,
            &self.utility,
            &self.meta,
            &self.meta_utility,
        ))
    }
}
