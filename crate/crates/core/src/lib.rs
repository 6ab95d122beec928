//! A design-search engine that explores a formal component language and
//! rewrites its own rules and search policies once a replayable certificate
//! shows the rewrite strictly improves utility over a declared, finite
//! environment model.

pub mod environment;
pub mod explore;
pub mod harness;
pub mod hash;
pub mod language;
pub mod oracle;
pub mod system;
pub mod transform;
pub mod verification;
