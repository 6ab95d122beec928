//! The design language: alphabet, concepts, rules, and the bounded
//! interpretation function that enumerates permissible concepts.

pub mod alphabet;
pub mod canon;
pub mod concept;
pub mod enumerate;
pub mod rules;

pub use alphabet::{Alphabet, AlphabetBuilder, ComponentSpec, Direction, PortSpec, Symbol, SymbolKind, Word};
pub use canon::{canonical_form, edit_distance};
pub use concept::{node_id, Concept, Edge, Node, PortRef, Wire};
pub use enumerate::{interpret, interpret_with_ceiling, Enumeration};
pub use rules::{Cmp, Constraint, Rule, RuleCategory, RuleSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LanguageError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown reference `{0}`")]
    UnknownReference(String),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("duplicate rule id `{0}`")]
    DuplicateRule(String),
    #[error("invalid: {0}")]
    Invalid(String),
    #[error("enumeration exceeded the expansion ceiling of {ceiling}")]
    BudgetExceeded { ceiling: u64 },
}
