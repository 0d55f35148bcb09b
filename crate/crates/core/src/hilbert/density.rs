use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{HilbertError, Result, StateVector, MAX_DENSITY_QUBITS, NORM_TOL};

/// Dense mixed state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<Complex64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > 1 << MAX_DENSITY_QUBITS {
        return Err(HilbertError::DimensionCap {
            qubits: dim.next_power_of_two().trailing_zeros() as usize,
            cap: MAX_DENSITY_QUBITS,
        });
    }
    Ok(())
}

/// Largest entry of `m - m†`.
pub(crate) fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Real eigenvalues (ascending) and orthonormal eigenvectors of a
/// Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    // Symmetrize first so tiny anti-Hermitian noise cannot leak in.
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut pairs: Vec<(f64, DVector<Complex64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

impl DensityOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(HilbertError::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        check_dim(matrix.nrows())?;
        let defect = hermiticity_defect(&matrix);
        if defect > NORM_TOL {
            return Err(HilbertError::NotHermitian(defect));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(HilbertError::TraceNotOne(trace.re));
        }
        let (values, _) = hermitian_eigen(&matrix);
        if let Some(&lowest) = values.first() {
            if lowest < -NORM_TOL {
                return Err(HilbertError::EigenvalueOutOfRange(lowest));
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &StateVector) -> Result<Self> {
        check_dim(state.dim())?;
        let v = DVector::from_column_slice(state.amplitudes());
        Ok(Self { matrix: &v * v.adjoint() })
    }

    /// `Σ w_i |ψ_i⟩⟨ψ_i|`, weights summing to 1.
    pub fn mixture(weighted: &[(f64, StateVector)]) -> Result<Self> {
        let total: f64 = weighted.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::ProbabilitySum(total));
        }
        let dim = weighted.first().map(|(_, s)| s.dim()).ok_or(HilbertError::ZeroState)?;
        check_dim(dim)?;
        let mut matrix = DMatrix::zeros(dim, dim);
        for (w, s) in weighted {
            if s.dim() != dim {
                return Err(HilbertError::DimensionMismatch { expected: dim, found: s.dim() });
            }
            let v = DVector::from_column_slice(s.amplitudes());
            matrix += (&v * v.adjoint()).scale(*w);
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { matrix: DMatrix::identity(dim, dim).scale(1.0 / dim as f64) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    /// `Tr[op ρ]`, real part.
    pub fn expectation(&self, op: &DMatrix<Complex64>) -> Result<f64> {
        if op.nrows() != self.dim() {
            return Err(HilbertError::DimensionMismatch { expected: self.dim(), found: op.nrows() });
        }
        Ok((op * &self.matrix).trace().re)
    }

    /// `P ρ P / Tr[P ρ]`; `None` when the projection has zero weight.
    pub(crate) fn project(&self, projector: &DMatrix<Complex64>) -> Option<Self> {
        let m = projector * &self.matrix * projector;
        let p = m.trace().re;
        (p > 0.0).then(|| Self { matrix: m.unscale(p) })
    }
}

/// `½ Σ |λ_i(ρ − σ)|`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(HilbertError::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let diff = &rho.matrix - &sigma.matrix;
    let (values, _) = hermitian_eigen(&diff);
    Ok((0.5 * values.iter().map(|v| v.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::haar_sample;
    use crate::rng::lab_rng;

    fn pure(s: &StateVector) -> DensityOperator {
        DensityOperator::from_pure(s).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let zero = pure(&StateVector::basis(1, 0).unwrap());
        let one = pure(&StateVector::basis(1, 1).unwrap());
        let plus = pure(&StateVector::plus(1).unwrap());
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&zero, &plus).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        let big = pure(&StateVector::basis(2, 0).unwrap());
        assert!(trace_distance(&zero, &big).is_err());
    }

    #[test]
    fn pure_state_trace_distance_formula() {
        let mut rng = lab_rng(2);
        for _ in 0..20 {
            let a = haar_sample(3, &mut rng).unwrap();
            let b = haar_sample(3, &mut rng).unwrap();
            let td = trace_distance(&pure(&a), &pure(&b)).unwrap();
            let expected = (1.0 - a.fidelity(&b).unwrap()).sqrt();
            assert!((td - expected).abs() < 1e-8);
            assert!((td - trace_distance(&pure(&b), &pure(&a)).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        assert!(matches!(DensityOperator::new(m.clone()), Err(HilbertError::TraceNotOne(_))));
        m[(0, 0)] = Complex64::new(1.5, 0.0);
        m[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(matches!(DensityOperator::new(m.clone()), Err(HilbertError::EigenvalueOutOfRange(_))));
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(matches!(DensityOperator::new(m), Err(HilbertError::NotHermitian(_))));
        assert!(DensityOperator::maximally_mixed(1 << 11).is_err());
    }
}
