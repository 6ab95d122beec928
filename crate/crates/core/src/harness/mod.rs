//! Batch runs: the explore, certify, and switch loop with its persisted
//! trace, snapshots, certificates, and report.

mod config;
mod run;

use std::path::PathBuf;

pub use config::{read_json, RunConfig};
pub use run::{
    basis_path, certificate_path, cmd_replay, cmd_run, episode_seed, execute, file_digest, load_certificate, Artifacts, EpisodeRow, LoopParams,
    RunReport, SwitchRow, TraceRecord, CONFIG_FILE, ENVIRONMENT_FILE, REPORT_FILE, TIMING_FILE, TRACE_FILE,
};

use crate::environment::EnvError;
use crate::explore::ExploreError;
use crate::transform::TransformError;
use crate::verification::VerifyError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("cannot parse {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{artifact} differs from the replay at line {line}")]
    Mismatch { artifact: String, line: usize },
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Environment(#[from] EnvError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

impl HarnessError {
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            HarnessError::Explore(ExploreError::BudgetExceeded { .. })
                | HarnessError::Transform(TransformError::Explore(ExploreError::BudgetExceeded { .. }))
        )
    }
}
