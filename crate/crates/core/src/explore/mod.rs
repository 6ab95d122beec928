//! Searching the design space with action sequences.

mod action;
mod episode;
mod interpreter;
mod policy;
mod rank;
mod state;

pub use action::{
    apply_action, apply_sequence, ActionContext, ActionKind, ActionOutcome, Binding, DesignAction, DesignSequence,
    NodeSel, PortSel, SequenceOutcome,
};
pub use episode::{run_episode, EpisodeOutcome};
pub use interpreter::{apply_interpreter, ExpansionCache, ExploreParams, RoundResult, DEFAULT_EXPANSION_CEILING};
pub use policy::{circuit_policy, default_policy, pipeline_policy, MAX_GATE_OPERAND};
pub use rank::{Ranker, UtilityParams};
pub use state::MachineState;

use crate::environment::EnvError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExploreError {
    #[error("exploration exceeded {ceiling} expansions")]
    BudgetExceeded { ceiling: u64 },
    #[error(transparent)]
    Environment(#[from] EnvError),
}
