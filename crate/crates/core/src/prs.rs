//! Binary-phase pseudorandom states `2^{-n/2} Σ_x (−1)^{f(x)} |x⟩`.
//!
//! The phase function is either a PPRF (the computational scheme) or a
//! k-wise independent polynomial (the statistical variant).

use num_complex::Complex64;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::hilbert::{HilbertError, StateVector, MAX_STATE_QUBITS};
use crate::primitives::{KwiseFunction, PprfKey, PrimitiveError, Prf};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrsError {
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("{0} qubits is outside 1..={MAX_STATE_QUBITS}")]
    QubitCount(usize),
}

pub type Result<T> = std::result::Result<T, PrsError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhaseFunction {
    /// Phase bit is the top bit of the one-byte PPRF output.
    Pprf(PprfKey),
    /// Phase bit is the one-bit polynomial output.
    Kwise(KwiseFunction),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrsKey {
    n: usize,
    phase: PhaseFunction,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_STATE_QUBITS {
        return Err(PrsError::QubitCount(n));
    }
    Ok(())
}

/// Fresh PPRF-backed key for an `n`-qubit state.
pub fn prs_setup(n: usize, rng: &mut impl RngCore) -> Result<PrsKey> {
    check_qubits(n)?;
    Ok(PrsKey { n, phase: PhaseFunction::Pprf(PprfKey::generate(n, 8, rng)?) })
}

/// Phase state from a random polynomial of `2k` coefficients over
/// GF(2^n).
pub fn prs_setup_kwise(n: usize, k: usize, rng: &mut impl Rng) -> Result<PrsKey> {
    check_qubits(n)?;
    Ok(PrsKey { n, phase: PhaseFunction::Kwise(KwiseFunction::random(k, n as u32, 1, rng)?) })
}

impl PrsKey {
    pub fn from_pprf(key: PprfKey) -> Result<Self> {
        let n = key.input_bits();
        check_qubits(n)?;
        Ok(Self { n, phase: PhaseFunction::Pprf(key) })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase_function(&self) -> &PhaseFunction {
        &self.phase
    }

    pub fn phase_bit(&self, x: u64) -> Result<bool> {
        Ok(match &self.phase {
            PhaseFunction::Pprf(k) => k.eval(x)?[0] >> 7 == 1,
            PhaseFunction::Kwise(f) => f.eval(x)? == 1,
        })
    }
}

/// `α_{k,x}` for every basis index `x`.
pub fn prs_amplitudes(key: &PrsKey) -> Result<Vec<Complex64>> {
    let scale = (0.5f64).powf(key.n as f64 / 2.0);
    (0..1u64 << key.n)
        .map(|x| Ok(Complex64::new(if key.phase_bit(x)? { -scale } else { scale }, 0.0)))
        .collect()
}

pub fn prs_state(key: &PrsKey) -> Result<StateVector> {
    Ok(StateVector::normalized(key.n, prs_amplitudes(key)?)?)
}
