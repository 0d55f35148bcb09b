//! Exact small-dimension quantum states and measurement theory.
//!
//! * [`StateVector`]: dense pure states over a register layout.
//! * [`DensityOperator`]: dense mixed states, trace distance.
//! * [`HybridState`]: superpositions whose branches carry long classical
//!   labels (serial numbers, signatures) next to a small dense payload.
//! * [`BinaryPovm`], [`ProjImp`]: projective and threshold implementations
//!   of binary POVMs.

mod density;
mod hybrid;
mod povm;
mod state;

use thiserror::Error;

pub use density::{hermitian_eigen, trace_distance, DensityOperator};
pub use hybrid::{Branch, HybridState, Label};
pub use povm::{
    mixture_povm, projective_implementation, threshold_measure, threshold_measure_mixed,
    BinaryPovm, ProjImp,
};
pub use state::{
    haar_sample, permutations, superpose, swap_test, swap_test_sample, type_state, RegisterLayout,
    StateVector,
};

/// Absolute tolerance for norms and amplitude equality.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance for anything that went through an eigensolver.
pub const EIGEN_TOL: f64 = 1e-8;
/// Outcomes with smaller Born probability are never returned.
pub const MIN_OUTCOME_PROB: f64 = 1e-12;
/// Largest dense state vector, in qubits.
pub const MAX_STATE_QUBITS: usize = 20;
/// Largest dense density operator, in qubits.
pub const MAX_DENSITY_QUBITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{qubits} qubits exceeds the cap of {cap}")]
    DimensionCap { qubits: usize, cap: usize },
    #[error("all amplitudes are zero")]
    ZeroState,
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("label {value} does not fit in {bits} bits")]
    LabelOutOfRange { value: u64, bits: usize },
    #[error("register {0} does not exist")]
    InvalidRegister(usize),
    #[error("oracle output width {declared} does not match register width {register}")]
    WidthMismatch { declared: usize, register: usize },
    #[error("oracle returned {value}, wider than {bits} bits")]
    OracleOutputOutOfRange { value: u64, bits: usize },
    #[error("duplicate entries are not allowed")]
    Duplicate,
    #[error("operator is not Hermitian (deviation {0})")]
    NotHermitian(f64),
    #[error("operator has eigenvalue {0} outside the allowed range")]
    EigenvalueOutOfRange(f64),
    #[error("trace {0} is not 1")]
    TraceNotOne(f64),
    #[error("probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("operator is not an orthogonal projector (deviation {0})")]
    NotProjector(f64),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("label map sends two branches to the same label")]
    LabelCollision,
    #[error("{0} copies is too many to symmetrize")]
    TooManyCopies(usize),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, HilbertError>;

/// Draw an index with probability proportional to `weights`, never
/// returning an entry whose share is below [`MIN_OUTCOME_PROB`].
pub(crate) fn sample_weighted(weights: &[f64], rng: &mut impl rand::Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let eligible = |w: f64| w / total >= MIN_OUTCOME_PROB;
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if !eligible(w) {
            continue;
        }
        last = Some(i);
        if u < w {
            return i;
        }
        u -= w;
    }
    // Rounding can leave a sliver of mass past the last eligible entry.
    last.expect("at least one outcome has non-negligible probability")
}
