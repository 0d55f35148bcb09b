use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::density::hermiticity_defect;
use super::{
    hermitian_eigen, sample_weighted, DensityOperator, HilbertError, RegisterLayout, Result, StateVector,
    EIGEN_TOL, NORM_TOL,
};

/// Eigenvalues closer than this are treated as one outcome.
const CLUSTER_TOL: f64 = 1e-9;

/// Acceptance operator `P` of a two-outcome measurement, `0 ≤ P ≤ I`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryPovm {
    operator: DMatrix<Complex64>,
}

impl BinaryPovm {
    pub fn new(operator: DMatrix<Complex64>) -> Result<Self> {
        if operator.nrows() != operator.ncols() {
            return Err(HilbertError::DimensionMismatch { expected: operator.nrows(), found: operator.ncols() });
        }
        let defect = hermiticity_defect(&operator);
        if defect > NORM_TOL {
            return Err(HilbertError::NotHermitian(defect));
        }
        let (values, _) = hermitian_eigen(&operator);
        for &v in [values.first(), values.last()].into_iter().flatten() {
            if !(-NORM_TOL..=1.0 + NORM_TOL).contains(&v) {
                return Err(HilbertError::EigenvalueOutOfRange(v));
            }
        }
        Ok(Self { operator })
    }

    pub fn operator(&self) -> &DMatrix<Complex64> {
        &self.operator
    }

    pub fn dim(&self) -> usize {
        self.operator.nrows()
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn accept_probability(&self, state: &StateVector) -> Result<f64> {
        if state.dim() != self.dim() {
            return Err(HilbertError::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        let v = DVector::from_column_slice(state.amplitudes());
        Ok((v.adjoint() * &self.operator * &v)[(0, 0)].re)
    }

    /// `Tr[P ρ]`.
    pub fn accept_probability_mixed(&self, rho: &DensityOperator) -> Result<f64> {
        rho.expectation(&self.operator)
    }
}

/// Deviation of `m` from being an orthogonal projector.
fn projector_defect(m: &DMatrix<Complex64>) -> f64 {
    let square = m * m - m;
    square.iter().map(|z| z.norm()).fold(hermiticity_defect(m), f64::max)
}

/// `Σ p_i Π_i` for a distribution over projectors.
pub fn mixture_povm(dist: &[(f64, DMatrix<Complex64>)]) -> Result<BinaryPovm> {
    let total: f64 = dist.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > NORM_TOL || dist.iter().any(|(p, _)| *p < 0.0) {
        return Err(HilbertError::ProbabilitySum(total));
    }
    let dim = dist.first().map(|(_, m)| m.nrows()).ok_or(HilbertError::ProbabilitySum(0.0))?;
    let mut operator = DMatrix::zeros(dim, dim);
    for (p, proj) in dist {
        if proj.nrows() != dim || proj.ncols() != dim {
            return Err(HilbertError::DimensionMismatch { expected: dim, found: proj.nrows() });
        }
        let defect = projector_defect(proj);
        if defect > EIGEN_TOL {
            return Err(HilbertError::NotProjector(defect));
        }
        operator += proj.scale(*p);
    }
    BinaryPovm::new(operator)
}

/// Spectral measurement `{Π_i}` with outcome labels `p_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjImp {
    eigenvalues: Vec<f64>,
    projectors: Vec<DMatrix<Complex64>>,
}

/// Group the spectrum of `povm` into distinct eigenvalues and their
/// eigenspace projectors.
pub fn projective_implementation(povm: &BinaryPovm) -> ProjImp {
    let dim = povm.dim();
    let (values, vectors) = hermitian_eigen(&povm.operator);
    let mut eigenvalues: Vec<f64> = Vec::new();
    let mut projectors: Vec<DMatrix<Complex64>> = Vec::new();
    let mut members = 0usize;
    for (v, vec) in values.into_iter().zip(vectors) {
        let v = v.clamp(0.0, 1.0);
        let outer = &vec * vec.adjoint();
        match eigenvalues.last_mut() {
            Some(last) if v - *last <= CLUSTER_TOL => {
                // Running mean keeps the label centred in the cluster.
                members += 1;
                *last += (v - *last) / members as f64;
                *projectors.last_mut().expect("paired with eigenvalue") += outer;
            }
            _ => {
                members = 1;
                eigenvalues.push(v);
                projectors.push(outer);
            }
        }
    }
    if projectors.is_empty() {
        eigenvalues.push(0.0);
        projectors.push(DMatrix::identity(dim, dim));
    }
    ProjImp { eigenvalues, projectors }
}

impl ProjImp {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[DMatrix<Complex64>] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    /// `Σ p_i Π_i`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (p, proj) in self.eigenvalues.iter().zip(&self.projectors) {
            out += proj.scale(*p);
        }
        out
    }

    /// Largest deviation from `Π_i Π_j = δ_ij Π_i` and `Σ Π_i = I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        for (i, a) in self.projectors.iter().enumerate() {
            sum += a;
            for (j, b) in self.projectors.iter().enumerate() {
                let mut prod = a * b;
                if i == j {
                    prod -= a;
                }
                worst = worst.max(prod.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        sum -= DMatrix::identity(dim, dim);
        worst.max(sum.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Outcome distribution on a pure state.
    pub fn probabilities(&self, state: &StateVector) -> Result<Vec<f64>> {
        if state.dim() != self.dim() {
            return Err(HilbertError::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        let v = DVector::from_column_slice(state.amplitudes());
        Ok(self.projectors.iter().map(|p| (p * &v).norm_squared()).collect())
    }

    /// Measure a pure state; returns the outcome index and post-state.
    pub fn measure(&self, state: &StateVector, rng: &mut impl Rng) -> Result<(usize, StateVector)> {
        let weights = self.probabilities(state)?;
        let i = sample_weighted(&weights, rng);
        let v = DVector::from_column_slice(state.amplitudes());
        let post = StateVector::normalized(state.num_qubits(), (&self.projectors[i] * v).as_slice().to_vec())?;
        Ok((i, post))
    }

    /// Measure a mixed state.
    pub fn measure_mixed(&self, rho: &DensityOperator, rng: &mut impl Rng) -> Result<(usize, DensityOperator)> {
        let weights = self
            .projectors
            .iter()
            .map(|p| rho.expectation(p))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .map(|w| w.max(0.0))
            .collect::<Vec<_>>();
        let i = sample_weighted(&weights, rng);
        let post = rho.project(&self.projectors[i]).ok_or(HilbertError::ZeroState)?;
        Ok((i, post))
    }

    /// Measure on register `reg` of a larger state, leaving other registers
    /// untouched apart from the collapse.
    pub fn measure_register(
        &self,
        state: &StateVector,
        layout: &RegisterLayout,
        reg: usize,
        rng: &mut impl Rng,
    ) -> Result<(usize, StateVector)> {
        let branches = self
            .projectors
            .iter()
            .map(|p| state.apply_local(layout, reg, p))
            .collect::<Result<Vec<_>>>()?;
        let weights: Vec<f64> = branches.iter().map(|b| b.norm().powi(2)).collect();
        let i = sample_weighted(&weights, rng);
        let post = StateVector::normalized(state.num_qubits(), branches[i].amplitudes().to_vec())?;
        Ok((i, post))
    }

    /// Weight of outcomes `≥ t` on a pure state.
    pub fn threshold_probability(&self, t: f64, state: &StateVector) -> Result<f64> {
        let probs = self.probabilities(state)?;
        Ok(self.eigenvalues.iter().zip(probs).filter(|(p, _)| **p >= t).map(|(_, w)| w).sum())
    }

    /// Threshold implementation: measure, then report whether the observed
    /// eigenvalue is at least `t`. The post-state is the projection onto the
    /// observed eigenspace.
    pub fn threshold(&self, t: f64, state: &StateVector, rng: &mut impl Rng) -> Result<(bool, StateVector)> {
        check_threshold(t)?;
        let (i, post) = self.measure(state, rng)?;
        Ok((self.eigenvalues[i] >= t, post))
    }

    pub fn threshold_register(
        &self,
        t: f64,
        state: &StateVector,
        layout: &RegisterLayout,
        reg: usize,
        rng: &mut impl Rng,
    ) -> Result<(bool, StateVector)> {
        check_threshold(t)?;
        let (i, post) = self.measure_register(state, layout, reg, rng)?;
        Ok((self.eigenvalues[i] >= t, post))
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(HilbertError::InvalidThreshold(t))
    }
}

/// `TI_t(P)` on a pure state.
pub fn threshold_measure(
    povm: &BinaryPovm,
    t: f64,
    state: &StateVector,
    rng: &mut impl Rng,
) -> Result<(bool, StateVector)> {
    projective_implementation(povm).threshold(t, state, rng)
}

/// `TI_t(P)` on a mixed state.
pub fn threshold_measure_mixed(
    povm: &BinaryPovm,
    t: f64,
    rho: &DensityOperator,
    rng: &mut impl Rng,
) -> Result<(bool, DensityOperator)> {
    check_threshold(t)?;
    let pi = projective_implementation(povm);
    let (i, post) = pi.measure_mixed(rho, rng)?;
    Ok((pi.eigenvalues[i] >= t, post))
}
