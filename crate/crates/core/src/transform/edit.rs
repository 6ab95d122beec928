use serde::{Deserialize, Serialize};

use super::meta::{EditKind, MetaRules, MetaUtility};
use super::TransformError;
use crate::environment::ModelSet;
use crate::explore::{DesignSequence, ExploreParams, MachineState};
use crate::language::Rule;
use crate::verification::{Location, RequirementSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "edit", rename_all = "kebab-case")]
pub enum Edit {
    AddRule { rule: Rule },
    RemoveRule { id: String },
    AddSequence { sequence: DesignSequence },
    RemoveSequence { name: String },
    SetUtilityParam { name: String, value: f64 },
    SetExplore { params: ExploreParams },
    SetMetaRules { rules: MetaRules },
    SetMetaUtility { utility: MetaUtility },
    /// Allowed only for the machine's own requirements.
    SetRequirements { requirements: RequirementSet },
    /// Never allowed: the environment is not the machine's to change.
    SetEnvironment { models: Box<ModelSet> },
}

impl Edit {
    pub fn kind(&self) -> Option<EditKind> {
        Some(match self {
            Edit::AddRule { .. } => EditKind::AddRule,
            Edit::RemoveRule { .. } => EditKind::RemoveRule,
            Edit::AddSequence { .. } => EditKind::AddSequence,
            Edit::RemoveSequence { .. } => EditKind::RemoveSequence,
            Edit::SetUtilityParam { .. } => EditKind::SetUtilityParam,
            Edit::SetExplore { .. } => EditKind::SetExploreParam,
            Edit::SetMetaRules { .. } | Edit::SetMetaUtility { .. } => EditKind::SetMetaParam,
            Edit::SetRequirements { .. } | Edit::SetEnvironment { .. } => return None,
        })
    }

    /// Edits to the proposer or checker, whose value shows only in what the
    /// next rewrite can achieve.
    pub fn is_meta(&self) -> bool {
        matches!(self, Edit::SetMetaRules { .. } | Edit::SetMetaUtility { .. })
    }

    fn forbidden(&self) -> Option<&'static str> {
        match self {
            Edit::SetEnvironment { .. } => Some("environment models"),
            Edit::SetRequirements { requirements } if requirements.location() == Location::EnvironmentHeld => {
                Some("environment requirements")
            }
            _ => None,
        }
    }
}

/// A named bundle of edits applied together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteProposal {
    pub name: String,
    pub edits: Vec<Edit>,
}

impl RewriteProposal {
    pub fn new(name: &str, edits: Vec<Edit>) -> Self {
        RewriteProposal {
            name: name.to_string(),
            edits,
        }
    }

    pub fn is_meta(&self) -> bool {
        self.edits.iter().any(Edit::is_meta)
    }

    /// Rejects edits to the environment and proposals over the basis's size
    /// limit.
    pub fn admissible(&self, basis: &MachineState) -> Result<(), TransformError> {
        if let Some(target) = self.edits.iter().find_map(Edit::forbidden) {
            return Err(TransformError::ForbiddenEdit(target.to_string()));
        }
        if self.edits.len() > basis.meta.max_edits {
            return Err(TransformError::TooLarge {
                edits: self.edits.len(),
                limit: basis.meta.max_edits,
            });
        }
        Ok(())
    }
}

fn inapplicable(msg: String) -> TransformError {
    TransformError::Inapplicable(msg)
}

/// The state after applying every edit in order, with stored concepts the
/// new rules forbid removed.
pub fn apply_proposal(basis: &MachineState, p: &RewriteProposal) -> Result<MachineState, TransformError> {
    p.admissible(basis)?;
    let mut s = basis.clone();
    for e in &p.edits {
        match e {
            Edit::AddRule { rule } => {
                s.rules = s.rules.with_rule(rule.clone()).map_err(|e| inapplicable(e.to_string()))?;
            }
            Edit::RemoveRule { id } => {
                s.rules = s.rules.without_rule(id).map_err(|e| inapplicable(e.to_string()))?;
            }
            Edit::AddSequence { sequence } => {
                if s.policy.iter().any(|q| q.name == sequence.name) {
                    return Err(inapplicable(format!("sequence {} already present", sequence.name)));
                }
                s.policy.push(sequence.clone());
            }
            Edit::RemoveSequence { name } => {
                let before = s.policy.len();
                s.policy.retain(|q| &q.name != name);
                if s.policy.len() == before {
                    return Err(inapplicable(format!("no sequence {name}")));
                }
            }
            Edit::SetUtilityParam { name, value } => {
                if !value.is_finite() {
                    return Err(inapplicable(format!("{name} must be finite")));
                }
                s.utility.weights.insert(name.clone(), *value);
            }
            Edit::SetExplore { params } => s.explore = params.clone(),
            Edit::SetMetaRules { rules } => {
                if rules.max_edits == 0 || rules.suite == 0 {
                    return Err(inapplicable("meta limits must be positive".to_string()));
                }
                s.meta = rules.clone();
            }
            Edit::SetMetaUtility { utility } => s.meta_utility = utility.clone(),
            Edit::SetRequirements { requirements } => s.requirements = requirements.clone(),
            Edit::SetEnvironment { .. } => unreachable!("rejected as forbidden"),
        }
    }
    let rules = &s.rules;
    s.concepts.retain(|c| matches!(rules.is_permissible(c), Ok(true)));
    Ok(s)
}
