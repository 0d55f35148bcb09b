//! Desk-scale laboratory for unclonable cryptography.
//!
//! Classical pieces (GGM puncturable PRF, Lamport one-time signatures, the
//! tree-structured deterministic signature) are implemented for real.
//! Quantum objects (phase states, subspace banknotes, purified coins,
//! symmetrized type states) are simulated exactly at small dimension, and
//! the compilers and security games built from them run as reproducible
//! experiments.
//!
//! Nothing here that rests on obfuscation or functional encryption is
//! secure: those primitives are replaced by correctness-only mocks and the
//! corresponding harnesses only exercise data flow.

pub mod coin;
pub mod detsig;
pub mod hilbert;
pub mod minischeme;
pub mod primitives;
pub mod prs;
pub mod purify;
pub mod report;
pub mod rng;
pub mod sde_ue;

pub use num_complex::Complex64;
