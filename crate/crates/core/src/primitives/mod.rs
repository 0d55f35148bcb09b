//! Classical building blocks: SHA-256 derivations, the GGM puncturable PRF,
//! k-wise independent polynomial families, and Lamport one-time signatures.

pub mod hash;
pub mod kwise;
pub mod ots;
pub mod pprf;

use thiserror::Error;

pub use kwise::{Gf2m, KwiseFunction};
pub use ots::{OtsKeypair, OtsSecretKey, OtsVerifyKey, DEFAULT_DIGEST_BITS};
pub use pprf::{CopathNode, PprfKey, Prf, PuncturedKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrimitiveError {
    #[error("input {value} does not fit in {bits} bits")]
    InputOutOfRange { value: u64, bits: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("input {0} is punctured")]
    Punctured(u64),
    #[error("point {0} appears twice in the puncture set")]
    DuplicatePoint(u64),
    #[error("puncture set is empty")]
    EmptySet,
    #[error("malformed encoding: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, PrimitiveError>;
