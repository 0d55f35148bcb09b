use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;

use super::{sample_weighted, HilbertError, Result, MAX_STATE_QUBITS, NORM_TOL};

/// Widths, in qubits, of the registers a state is built from.
///
/// Register 0 occupies the most significant bits of a basis index, and each
/// register value is read most-significant-bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    widths: Vec<usize>,
}

impl RegisterLayout {
    pub fn new(widths: impl Into<Vec<usize>>) -> Self {
        Self { widths: widths.into() }
    }

    /// A single register covering all qubits.
    pub fn flat(num_qubits: usize) -> Self {
        Self::new(vec![num_qubits])
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn total_qubits(&self) -> usize {
        self.widths.iter().sum()
    }

    pub fn width(&self, reg: usize) -> Result<usize> {
        self.widths.get(reg).copied().ok_or(HilbertError::InvalidRegister(reg))
    }

    /// Bit offset of `reg`, counted from the least significant end.
    fn shift(&self, reg: usize) -> usize {
        self.widths[reg + 1..].iter().sum()
    }

    /// Basis index for a tuple of register values.
    pub fn join(&self, values: &[u64]) -> Result<usize> {
        if values.len() != self.widths.len() {
            return Err(HilbertError::DimensionMismatch {
                expected: self.widths.len(),
                found: values.len(),
            });
        }
        let mut index = 0usize;
        for (&v, &w) in values.iter().zip(&self.widths) {
            if w < 64 && v >> w != 0 {
                return Err(HilbertError::LabelOutOfRange { value: v, bits: w });
            }
            index = (index << w) | v as usize;
        }
        Ok(index)
    }

    /// Value held by register `reg` in basis state `index`.
    pub fn value(&self, index: usize, reg: usize) -> u64 {
        let w = self.widths[reg];
        ((index >> self.shift(reg)) & ((1usize << w) - 1)) as u64
    }

    pub fn split(&self, index: usize) -> Vec<u64> {
        (0..self.widths.len()).map(|r| self.value(index, r)).collect()
    }

    fn with_value(&self, index: usize, reg: usize, value: u64) -> usize {
        let shift = self.shift(reg);
        let mask = ((1usize << self.widths[reg]) - 1) << shift;
        (index & !mask) | ((value as usize) << shift)
    }
}

/// Dense pure state on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_cap(num_qubits: usize) -> Result<()> {
    if num_qubits > MAX_STATE_QUBITS {
        Err(HilbertError::DimensionCap { qubits: num_qubits, cap: MAX_STATE_QUBITS })
    } else {
        Ok(())
    }
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

impl StateVector {
    /// Wrap amplitudes that are already normalized.
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unchecked(num_qubits, amplitudes)?;
        let norm = norm_sqr(&state.amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(HilbertError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Normalize arbitrary nonzero amplitudes.
    pub fn normalized(num_qubits: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_cap(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return Err(HilbertError::DimensionMismatch {
                expected: 1 << num_qubits,
                found: amplitudes.len(),
            });
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HilbertError::ZeroState);
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { num_qubits, amplitudes })
    }

    fn unchecked(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_cap(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return Err(HilbertError::DimensionMismatch {
                expected: 1 << num_qubits,
                found: amplitudes.len(),
            });
        }
        Ok(Self { num_qubits, amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_cap(num_qubits)?;
        if index >= 1 << num_qubits {
            return Err(HilbertError::LabelOutOfRange { value: index as u64, bits: num_qubits });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// Uniform superposition over all basis states.
    pub fn plus(num_qubits: usize) -> Result<Self> {
        check_cap(num_qubits)?;
        let dim = 1usize << num_qubits;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self { num_qubits, amplitudes: vec![a; dim] })
    }

    /// The zero-qubit state, used as the payload of purely classical branches.
    pub fn unit() -> Self {
        Self { num_qubits: 0, amplitudes: vec![Complex64::new(1.0, 0.0)] }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(HilbertError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Euclidean distance between the amplitude vectors.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(HilbertError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// `self ⊗ other`, with `self` in the more significant position.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let qubits = self.num_qubits + other.num_qubits;
        check_cap(qubits)?;
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(Self { num_qubits: qubits, amplitudes })
    }

    /// Apply `H` to every qubit.
    pub fn hadamard_all(&self) -> Self {
        let mut amps = self.amplitudes.clone();
        let dim = amps.len();
        let mut half = 1;
        while half < dim {
            for block in (0..dim).step_by(2 * half) {
                for i in block..block + half {
                    let (a, b) = (amps[i], amps[i + half]);
                    amps[i] = a + b;
                    amps[i + half] = a - b;
                }
            }
            half *= 2;
        }
        let scale = (dim as f64).sqrt().recip();
        amps.iter_mut().for_each(|a| *a *= scale);
        Self { num_qubits: self.num_qubits, amplitudes: amps }
    }

    /// Permute register contents: output register `i` receives input
    /// register `order[i]`.
    pub fn permute_registers(&self, layout: &RegisterLayout, order: &[usize]) -> Result<Self> {
        self.check_layout(layout)?;
        if order.len() != layout.widths.len() {
            return Err(HilbertError::DimensionMismatch {
                expected: layout.widths.len(),
                found: order.len(),
            });
        }
        let out_layout = RegisterLayout::new(order.iter().map(|&r| layout.widths[r]).collect::<Vec<_>>());
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            let values = layout.split(index);
            let permuted: Vec<u64> = order.iter().map(|&r| values[r]).collect();
            amplitudes[out_layout.join(&permuted)?] = *a;
        }
        Ok(Self { num_qubits: self.num_qubits, amplitudes })
    }

    /// Standard oracle `|x⟩|w⟩ ↦ |x⟩|w ⊕ f(x)⟩`.
    ///
    /// `f` receives the values of `input_regs` in order and must produce an
    /// `out_bits`-bit result, where `out_bits` is the width of `output_reg`.
    pub fn apply_oracle<F>(
        &self,
        layout: &RegisterLayout,
        input_regs: &[usize],
        output_reg: usize,
        out_bits: usize,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[u64]) -> u64,
    {
        self.check_layout(layout)?;
        let width = layout.width(output_reg)?;
        if width != out_bits {
            return Err(HilbertError::WidthMismatch { declared: out_bits, register: width });
        }
        for &r in input_regs {
            layout.width(r)?;
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut inputs = vec![0u64; input_regs.len()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            for (slot, &r) in inputs.iter_mut().zip(input_regs) {
                *slot = layout.value(index, r);
            }
            let y = f(&inputs);
            if out_bits < 64 && y >> out_bits != 0 {
                return Err(HilbertError::OracleOutputOutOfRange { value: y, bits: out_bits });
            }
            let w = layout.value(index, output_reg);
            amplitudes[layout.with_value(index, output_reg, w ^ y)] += *a;
        }
        Ok(Self { num_qubits: self.num_qubits, amplitudes })
    }

    /// Apply a `2^w × 2^w` matrix to register `reg`. The result is not
    /// renormalized.
    pub fn apply_local(&self, layout: &RegisterLayout, reg: usize, op: &DMatrix<Complex64>) -> Result<Self> {
        self.check_layout(layout)?;
        let w = layout.width(reg)?;
        let d = 1usize << w;
        if op.nrows() != d || op.ncols() != d {
            return Err(HilbertError::DimensionMismatch { expected: d, found: op.nrows() });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let col = layout.value(index, reg) as usize;
            for row in 0..d {
                let m = op[(row, col)];
                if m != Complex64::new(0.0, 0.0) {
                    amplitudes[layout.with_value(index, reg, row as u64)] += m * a;
                }
            }
        }
        Ok(Self { num_qubits: self.num_qubits, amplitudes })
    }

    /// Measure the given registers in the computational basis.
    ///
    /// Returns the observed values (in the order of `regs`) and the
    /// collapsed, renormalized state.
    pub fn measure(
        &self,
        layout: &RegisterLayout,
        regs: &[usize],
        rng: &mut impl Rng,
    ) -> Result<(Vec<u64>, Self)> {
        self.check_layout(layout)?;
        for &r in regs {
            layout.width(r)?;
        }
        let outcome_of = |index: usize| regs.iter().map(|&r| layout.value(index, r)).collect::<Vec<_>>();
        let mut marginal: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (index, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                *marginal.entry(outcome_of(index)).or_default() += p;
            }
        }
        let (outcomes, weights): (Vec<_>, Vec<_>) = marginal.into_iter().unzip();
        if outcomes.is_empty() {
            return Err(HilbertError::ZeroState);
        }
        let chosen = outcomes[sample_weighted(&weights, rng)].clone();
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(index, a)| if outcome_of(index) == chosen { *a } else { Complex64::new(0.0, 0.0) })
            .collect();
        let collapsed = Self::normalized(self.num_qubits, amplitudes)?;
        Ok((chosen, collapsed))
    }

    /// Measure every qubit.
    pub fn measure_all(&self, rng: &mut impl Rng) -> (usize, Self) {
        let weights: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let index = sample_weighted(&weights, rng);
        (index, Self::basis(self.num_qubits, index).expect("index in range"))
    }

    /// Born probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_layout(&self, layout: &RegisterLayout) -> Result<()> {
        if layout.total_qubits() != self.num_qubits {
            return Err(HilbertError::DimensionMismatch {
                expected: self.num_qubits,
                found: layout.total_qubits(),
            });
        }
        Ok(())
    }

    /// Little-endian encoding: `num_qubits` as `u32`, then each amplitude as
    /// `(re, im)` `f64` pairs in basis order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 16 * self.dim());
        out.extend_from_slice(&(self.num_qubits as u32).to_le_bytes());
        for a in &self.amplitudes {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header: [u8; 4] = bytes
            .get(..4)
            .and_then(|h| h.try_into().ok())
            .ok_or_else(|| HilbertError::Malformed("missing header".into()))?;
        let num_qubits = u32::from_le_bytes(header) as usize;
        check_cap(num_qubits)?;
        let body = &bytes[4..];
        if body.len() != 16 << num_qubits {
            return Err(HilbertError::Malformed(format!(
                "expected {} amplitude bytes, found {}",
                16 << num_qubits,
                body.len()
            )));
        }
        let amplitudes = body
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Self::new(num_qubits, amplitudes)
    }
}

/// Build the normalized superposition `Σ amp |label⟩` over `layout`.
pub fn superpose(layout: &RegisterLayout, terms: &[(Vec<u64>, Complex64)]) -> Result<StateVector> {
    let qubits = layout.total_qubits();
    check_cap(qubits)?;
    if terms.is_empty() {
        return Err(HilbertError::ZeroState);
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
    for (label, amp) in terms {
        amplitudes[layout.join(label)?] += amp;
    }
    StateVector::normalized(qubits, amplitudes)
}

/// Exact SWAP-test acceptance probability `(1 + |⟨a|b⟩|²) / 2`.
pub fn swap_test(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(HilbertError::DimensionMismatch { expected: a.num_qubits(), found: b.num_qubits() });
    }
    Ok((1.0 + a.fidelity(b)?) / 2.0)
}

/// One run of the SWAP test.
pub fn swap_test_sample(a: &StateVector, b: &StateVector, rng: &mut impl Rng) -> Result<bool> {
    let p = swap_test(a, b)?;
    Ok(rng.random::<f64>() < p)
}

/// Haar-random state: a normalized vector of i.i.d. complex Gaussians.
pub fn haar_sample(num_qubits: usize, rng: &mut impl Rng) -> Result<StateVector> {
    check_cap(num_qubits)?;
    if num_qubits == 0 {
        return Err(HilbertError::DimensionCap { qubits: 0, cap: MAX_STATE_QUBITS });
    }
    let amplitudes = (0..1usize << num_qubits)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::normalized(num_qubits, amplitudes)
}

/// All permutations of `0..t` in lexicographic order.
pub fn permutations(t: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(t), &mut vec![false; t], &mut out);
    out
}

/// Unit-norm symmetrization `(1/√t!) Σ_π ⊗_i |x_{π(i)}⟩` of distinct
/// `bits`-bit strings.
pub fn type_state(bits: usize, xs: &[u64]) -> Result<StateVector> {
    let t = xs.len();
    if t == 0 {
        return Err(HilbertError::ZeroState);
    }
    if t > 8 {
        return Err(HilbertError::TooManyCopies(t));
    }
    check_cap(bits * t)?;
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(HilbertError::Duplicate);
    }
    let layout = RegisterLayout::new(vec![bits; t]);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << (bits * t)];
    let scale = Complex64::new(1.0 / (factorial(t) as f64).sqrt(), 0.0);
    for perm in permutations(t) {
        let values: Vec<u64> = perm.iter().map(|&i| xs[i]).collect();
        amplitudes[layout.join(&values)?] += scale;
    }
    StateVector::new(bits * t, amplitudes)
}

pub(crate) fn factorial(t: usize) -> u64 {
    (1..=t as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::lab_rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_amps(state: &StateVector, expected: &[f64]) {
        assert_eq!(state.dim(), expected.len());
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!((a - c(*e)).norm() < 1e-12, "{:?} vs {:?}", state.amplitudes(), expected);
        }
    }

    #[test]
    fn superpose_examples() {
        let one = RegisterLayout::flat(1);
        assert_amps(&superpose(&one, &[(vec![0], c(1.0))]).unwrap(), &[1.0, 0.0]);
        assert_amps(
            &superpose(&one, &[(vec![0], c(1.0)), (vec![1], c(1.0))]).unwrap(),
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        );
        let two = RegisterLayout::new(vec![1, 1]);
        let singlet = superpose(&two, &[(vec![0, 1], c(1.0)), (vec![1, 0], c(-1.0))]).unwrap();
        assert_amps(&singlet, &[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]);
    }

    #[test]
    fn superpose_errors() {
        let one = RegisterLayout::flat(1);
        assert_eq!(superpose(&one, &[(vec![0], c(0.0))]), Err(HilbertError::ZeroState));
        assert_eq!(superpose(&one, &[]), Err(HilbertError::ZeroState));
        assert!(matches!(
            superpose(&one, &[(vec![2], c(1.0))]),
            Err(HilbertError::LabelOutOfRange { value: 2, bits: 1 })
        ));
    }

    #[test]
    fn oracle_examples() {
        let layout = RegisterLayout::new(vec![1, 1]);
        let plus_zero = superpose(&layout, &[(vec![0, 0], c(1.0)), (vec![1, 0], c(1.0))]).unwrap();
        let bell = plus_zero.apply_oracle(&layout, &[0], 1, 1, |x| x[0]).unwrap();
        assert_amps(&bell, &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        assert_eq!(plus_zero.apply_oracle(&layout, &[0], 1, 1, |_| 0).unwrap(), plus_zero);

        let layout3 = RegisterLayout::new(vec![2, 1]);
        let ghz_like = superpose(&layout3, &[(vec![0, 0], c(1.0)), (vec![3, 0], c(1.0))]).unwrap();
        let parity = |x: &[u64]| u64::from(x[0].count_ones() % 2 == 1);
        assert_eq!(ghz_like.apply_oracle(&layout3, &[0], 1, 1, parity).unwrap(), ghz_like);
    }

    #[test]
    fn oracle_width_errors() {
        let layout = RegisterLayout::new(vec![1, 1]);
        let s = StateVector::basis(2, 0).unwrap();
        assert!(matches!(
            s.apply_oracle(&layout, &[0], 1, 2, |_| 0),
            Err(HilbertError::WidthMismatch { declared: 2, register: 1 })
        ));
        assert!(matches!(
            s.apply_oracle(&layout, &[0], 1, 1, |_| 2),
            Err(HilbertError::OracleOutputOutOfRange { .. })
        ));
    }

    #[test]
    fn measure_basis_state_is_deterministic() {
        let mut rng = lab_rng(1);
        let s = StateVector::basis(1, 0).unwrap();
        let (outcome, post) = s.measure(&RegisterLayout::flat(1), &[0], &mut rng).unwrap();
        assert_eq!(outcome, vec![0]);
        assert_eq!(post, s);
    }

    #[test]
    fn measure_plus_frequency() {
        let mut rng = lab_rng(7);
        let plus = StateVector::plus(1).unwrap();
        let layout = RegisterLayout::flat(1);
        let zeros = (0..10_000)
            .filter(|_| plus.measure(&layout, &[0], &mut rng).unwrap().0 == vec![0])
            .count();
        let freq = zeros as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn repeated_measurement_reproduces_outcome() {
        let mut rng = lab_rng(11);
        let layout = RegisterLayout::new(vec![2, 2]);
        for _ in 0..100 {
            let s = haar_sample(4, &mut rng).unwrap();
            let (first, post) = s.measure(&layout, &[1], &mut rng).unwrap();
            let (second, again) = post.measure(&layout, &[1], &mut rng).unwrap();
            assert_eq!(first, second);
            assert!(again.distance(&post).unwrap() < 1e-12);
        }
    }

    #[test]
    fn swap_test_examples() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let plus = StateVector::plus(1).unwrap();
        assert_eq!(swap_test(&zero, &zero).unwrap(), 1.0);
        assert_eq!(swap_test(&zero, &one).unwrap(), 0.5);
        assert!((swap_test(&zero, &plus).unwrap() - 0.75).abs() < 1e-12);
        assert!(swap_test(&zero, &StateVector::basis(2, 0).unwrap()).is_err());
    }

    #[test]
    fn haar_moments() {
        let mut rng = lab_rng(3);
        let zero = StateVector::basis(1, 0).unwrap();
        let mean: f64 =
            (0..10_000).map(|_| haar_sample(1, &mut rng).unwrap().fidelity(&zero).unwrap()).sum::<f64>() / 1e4;
        assert!((mean - 0.5).abs() <= 0.02, "mean {mean}");

        let fixed = haar_sample(2, &mut rng).unwrap();
        let mut total = 0.0;
        for _ in 0..10_000 {
            let s = haar_sample(2, &mut rng).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-9);
            total += s.fidelity(&fixed).unwrap();
        }
        assert!((total / 1e4 - 0.25).abs() <= 0.02);
        assert!(haar_sample(MAX_STATE_QUBITS + 1, &mut rng).is_err());
    }

    #[test]
    fn type_state_examples() {
        assert_eq!(type_state(3, &[5]).unwrap(), StateVector::basis(3, 5).unwrap());
        let t2 = type_state(1, &[0, 1]).unwrap();
        assert_amps(&t2, &[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]);
        assert_eq!(type_state(2, &[1, 1]), Err(HilbertError::Duplicate));
    }

    #[test]
    fn type_state_permutation_invariant() {
        let s = type_state(2, &[0, 2, 3]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let layout = RegisterLayout::new(vec![2, 2, 2]);
        for perm in permutations(3) {
            let p = s.permute_registers(&layout, &perm).unwrap();
            assert!(p.distance(&s).unwrap() < 1e-12);
        }
    }

    #[test]
    fn serialization_layout() {
        let s = StateVector::plus(1).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], &[1, 0, 0, 0]);
        let re = f64::from_le_bytes(bytes[4..12].try_into().unwrap());
        assert!((re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(&bytes[12..20], &0f64.to_le_bytes());
        assert_eq!(bytes.len(), 4 + 32);
        assert_eq!(StateVector::from_bytes(&bytes).unwrap(), s);
        assert!(StateVector::from_bytes(&bytes[..10]).is_err());
    }

    #[test]
    fn apply_local_matches_tensor_structure() {
        let mut rng = lab_rng(5);
        let a = haar_sample(1, &mut rng).unwrap();
        let b = haar_sample(2, &mut rng).unwrap();
        let joint = a.tensor(&b).unwrap();
        let layout = RegisterLayout::new(vec![1, 2]);
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let flipped = joint.apply_local(&layout, 0, &x).unwrap();
        let a_flipped = StateVector::new(1, vec![a.amplitudes()[1], a.amplitudes()[0]]).unwrap();
        assert!(flipped.distance(&a_flipped.tensor(&b).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn hadamard_is_involution() {
        let mut rng = lab_rng(9);
        let s = haar_sample(5, &mut rng).unwrap();
        assert!(s.hadamard_all().hadamard_all().distance(&s).unwrap() < 1e-12);
        let h0 = StateVector::basis(3, 0).unwrap().hadamard_all();
        assert!(h0.distance(&StateVector::plus(3).unwrap()).unwrap() < 1e-12);
    }
}
