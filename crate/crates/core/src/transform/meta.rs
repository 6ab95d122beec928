use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::environment::ModelSet;

/// Families of edits the proposer may generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EditKind {
    AddRule,
    RemoveRule,
    AddSequence,
    RemoveSequence,
    SetUtilityParam,
    SetExploreParam,
    SetMetaParam,
}

impl EditKind {
    pub const ALL: [EditKind; 7] = [
        EditKind::AddRule,
        EditKind::RemoveRule,
        EditKind::AddSequence,
        EditKind::RemoveSequence,
        EditKind::SetUtilityParam,
        EditKind::SetExploreParam,
        EditKind::SetMetaParam,
    ];
}

/// Settings of the proposer and the proof checker, themselves editable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRules {
    /// Most edits one proposal may carry.
    pub max_edits: usize,
    /// Most proposals generated per call.
    pub max_proposals: usize,
    /// Episodes per utility evaluation.
    pub suite: u32,
    pub enabled: BTreeSet<EditKind>,
    /// What counts as an improvement. Never proposed for change.
    #[serde(default)]
    pub criterion: Criterion,
}

/// Improvement test applied to per-model utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Strictly better under every model.
    #[default]
    AllModels,
    /// Strictly better in model-weighted mean; for experiments only.
    WeightedMean,
}

impl Criterion {
    pub fn improves(self, before: &[f64], after: &[f64], env: &ModelSet) -> bool {
        if before.len() != after.len() || before.len() != env.models.len() || before.is_empty() {
            return false;
        }
        match self {
            Criterion::AllModels => before.iter().zip(after).all(|(b, a)| a > b),
            Criterion::WeightedMean => env.expectation(after) > env.expectation(before),
        }
    }
}

impl Default for MetaRules {
    fn default() -> Self {
        MetaRules {
            max_edits: 1,
            max_proposals: 100,
            suite: 1,
            enabled: EditKind::ALL.into_iter().collect(),
            criterion: Criterion::AllModels,
        }
    }
}

/// Value of a certified rewrite to the machine. Only certified rewrites are
/// ever accepted; shaping decides which of several certified rewrites wins.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetaUtility {
    /// 1 when the certificate concludes improvement, else 0.
    #[default]
    Indicator,
    /// The indicator plus `weight` times the mean edit distance between the
    /// successor's submissions and the archive of earlier submissions.
    ShapedOriginality { weight: f64 },
}

impl MetaUtility {
    pub fn value(&self, conclusion: bool, originality: f64) -> f64 {
        if !conclusion {
            return 0.0;
        }
        match self {
            MetaUtility::Indicator => 1.0,
            MetaUtility::ShapedOriginality { weight } => 1.0 + weight * originality,
        }
    }

    pub fn is_shaped(&self) -> bool {
        matches!(self, MetaUtility::ShapedOriginality { weight } if *weight > 0.0)
    }
}
