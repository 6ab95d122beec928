//! Certified self-rewriting of the machine's rules, policy, and settings.

mod certify;
mod edit;
mod meta;
mod propose;
mod switch;

pub use certify::{check_certificate, certify, evaluate, originality, suite_seeds, Certificate, Certifier, CHECKER_VERSION};
pub use edit::{apply_proposal, Edit, RewriteProposal};
pub use meta::{Criterion, EditKind, MetaRules, MetaUtility};
pub use propose::{propose, MAX_PRUNE_BOUND};
pub use switch::{search_certified, self_modify, switch, Search, SelfModification, SwitchEvent};

use crate::explore::ExploreError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("edits to the {0} are forbidden")]
    ForbiddenEdit(String),
    #[error("proposal carries {edits} edits, the limit is {limit}")]
    TooLarge { edits: usize, limit: usize },
    #[error("proposal does not apply: {0}")]
    Inapplicable(String),
    #[error("certificate was issued for a different basis")]
    StaleBasis,
    #[error("certificate does not check")]
    InvalidCertificate,
    #[error("proposal does not improve every model")]
    NotImproving,
    #[error(transparent)]
    Explore(#[from] ExploreError),
}
