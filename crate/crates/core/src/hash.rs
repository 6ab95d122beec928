//! Canonical text encoding and content hashing.
//!
//! Every persisted artifact (concepts, rule sets, machines, snapshots,
//! certificates) is written as pretty-printed JSON with a fixed field order
//! and sorted maps. The content hash of an artifact is the SHA-256 of that
//! encoding, rendered as lowercase hex.

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Lowercase-hex SHA-256 digest.
pub type ContentHash = String;

pub fn to_text<T: Serialize>(value: &T) -> String {
    // Only maps with non-string keys can fail, and no artifact type has them.
    let mut s = serde_json::to_string_pretty(value).expect("artifact types always serialize");
    s.push('\n');
    s
}

pub fn from_text<T: DeserializeOwned>(text: &str) -> Result<T, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn sha256_hex(bytes: &[u8]) -> ContentHash {
    hex::encode(Sha256::digest(bytes))
}

pub fn content_hash<T: Serialize>(value: &T) -> ContentHash {
    sha256_hex(to_text(value).as_bytes())
}
