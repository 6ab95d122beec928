//! Timed Mealy machines: simulation, composition, decomposition,
//! abstraction, and bounded equivalence.

mod abstraction;
mod compose;
mod equivalence;
pub mod library;
mod machine;
mod refine;

pub use abstraction::{abstract_system, AbstractSystem, AbstractionSpec};
pub use compose::{connect, feedback, product, FeedbackLoop, Wiring};
pub use equivalence::{equivalent, equivalent_with_ceiling, DEFAULT_STREAM_CEILING};
pub use machine::{DataSet, MealySystem, TimeScale, Trace, Value};
pub use refine::{decompose, shipped_decompositions, DecompositionCase, Split};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("value out of domain: {0}")]
    OutOfDomain(String),
    #[error("machines run on different time scales")]
    TimeScaleMismatch,
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("a machine cannot be wired to itself")]
    SelfWiring,
    #[error("feedback output depends on its own input in the same step")]
    AlgebraicLoop,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("machines have different input alphabets")]
    SignatureMismatch,
    #[error("stream count exceeds ceiling {ceiling}")]
    BudgetExceeded { ceiling: u64 },
    #[error("malformed machine: {0}")]
    Malformed(String),
}
