use bytes::Bytes;
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;

use super::{sample_weighted, HilbertError, RegisterLayout, Result, StateVector, NORM_TOL};

/// Classical register contents of one branch: a tuple of byte strings.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Vec<Bytes>);

impl Label {
    pub fn new(parts: Vec<Bytes>) -> Self {
        Self(parts)
    }

    /// Label whose parts are big-endian integers of the given byte widths.
    pub fn from_ints(values: &[(u64, usize)]) -> Self {
        Self(
            values
                .iter()
                .map(|&(v, width)| Bytes::copy_from_slice(&v.to_be_bytes()[8 - width..]))
                .collect(),
        )
    }

    pub fn parts(&self) -> &[Bytes] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Part `i` read as a big-endian integer.
    pub fn int(&self, i: usize) -> Option<u64> {
        let part = self.0.get(i)?;
        if part.len() > 8 {
            return None;
        }
        Some(part.iter().fold(0u64, |acc, &b| (acc << 8) | u64::from(b)))
    }

    pub fn concat(&self, other: &Label) -> Label {
        Label(self.0.iter().chain(&other.0).cloned().collect())
    }
}

/// One branch: amplitude times a unit-norm payload.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub amplitude: Complex64,
    pub payload: StateVector,
}

impl Branch {
    /// `amplitude · payload` as a raw vector.
    pub fn weighted(&self) -> Vec<Complex64> {
        self.payload.amplitudes().iter().map(|p| self.amplitude * p).collect()
    }

    pub fn weight(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// `Σ_label amp_label |label⟩ ⊗ |payload_label⟩` in canonical form.
///
/// Branches with equal labels are merged on insertion, so the map holds at
/// most one branch per label. Values may be unnormalized while being built;
/// [`HybridState::is_normalized`] checks the global norm.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    payload_qubits: usize,
    branches: BTreeMap<Label, Branch>,
}

impl HybridState {
    pub fn new(payload_qubits: usize) -> Self {
        Self { payload_qubits, branches: BTreeMap::new() }
    }

    /// A single classical label with no quantum payload.
    pub fn classical(label: Label) -> Self {
        let mut s = Self::new(0);
        s.branches.insert(label, Branch { amplitude: Complex64::new(1.0, 0.0), payload: StateVector::unit() });
        s
    }

    /// A single label carrying `payload`.
    pub fn product(label: Label, payload: StateVector) -> Self {
        let mut s = Self::new(payload.num_qubits());
        s.branches.insert(label, Branch { amplitude: Complex64::new(1.0, 0.0), payload });
        s
    }

    pub fn payload_qubits(&self) -> usize {
        self.payload_qubits
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn branches(&self) -> impl Iterator<Item = (&Label, &Branch)> {
        self.branches.iter()
    }

    pub fn branch(&self, label: &Label) -> Option<&Branch> {
        self.branches.get(label)
    }

    /// Add `amplitude · |label⟩|payload⟩`, merging with an existing branch.
    pub fn add(&mut self, label: Label, amplitude: Complex64, payload: StateVector) -> Result<()> {
        if payload.num_qubits() != self.payload_qubits {
            return Err(HilbertError::DimensionMismatch {
                expected: self.payload_qubits,
                found: payload.num_qubits(),
            });
        }
        match self.branches.remove(&label) {
            None => {
                self.branches.insert(label, Branch { amplitude, payload });
            }
            Some(existing) => {
                let mut w = existing.weighted();
                for (wi, p) in w.iter_mut().zip(payload.amplitudes()) {
                    *wi += amplitude * p;
                }
                self.add_weighted(label, w)?;
            }
        }
        Ok(())
    }

    /// Add an unnormalized payload vector; its norm becomes the amplitude.
    pub fn add_weighted(&mut self, label: Label, weighted: Vec<Complex64>) -> Result<()> {
        if weighted.len() != 1 << self.payload_qubits {
            return Err(HilbertError::DimensionMismatch { expected: 1 << self.payload_qubits, found: weighted.len() });
        }
        let mut weighted = weighted;
        if let Some(existing) = self.branches.remove(&label) {
            for (wi, e) in weighted.iter_mut().zip(existing.weighted()) {
                *wi += e;
            }
        }
        let norm = weighted.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-15 {
            return Ok(());
        }
        let payload = StateVector::normalized(self.payload_qubits, weighted)?;
        self.branches.insert(label, Branch { amplitude: Complex64::new(norm, 0.0), payload });
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.branches.values().map(Branch::weight).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr().sqrt() - 1.0).abs() <= NORM_TOL
    }

    /// Rescale to unit norm.
    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(HilbertError::ZeroState);
        }
        self.branches.values_mut().for_each(|b| b.amplitude /= norm);
        Ok(self)
    }

    /// `⟨self|other⟩`. Branches only overlap when their labels agree.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.payload_qubits != other.payload_qubits {
            return Err(HilbertError::DimensionMismatch {
                expected: self.payload_qubits,
                found: other.payload_qubits,
            });
        }
        let (small, large, flip) =
            if self.len() <= other.len() { (self, other, false) } else { (other, self, true) };
        let mut total = Complex64::new(0.0, 0.0);
        for (label, a) in &small.branches {
            if let Some(b) = large.branches.get(label) {
                let overlap = a.amplitude.conj() * b.amplitude * a.payload.inner(&b.payload)?;
                total += if flip { overlap.conj() } else { overlap };
            }
        }
        Ok(total)
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let d2 = self.norm_sqr() + other.norm_sqr() - 2.0 * self.inner(other)?.re;
        Ok(d2.max(0.0).sqrt())
    }

    /// `self ⊗ other`: labels concatenated, payloads tensored.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut out = Self::new(self.payload_qubits + other.payload_qubits);
        for (la, a) in &self.branches {
            for (lb, b) in &other.branches {
                out.branches.insert(
                    la.concat(lb),
                    Branch { amplitude: a.amplitude * b.amplitude, payload: a.payload.tensor(&b.payload)? },
                );
            }
        }
        Ok(out)
    }

    /// Keep only branches satisfying `keep`. The result is not renormalized.
    pub fn filter(&self, keep: impl Fn(&Label) -> bool) -> Self {
        Self {
            payload_qubits: self.payload_qubits,
            branches: self.branches.iter().filter(|(l, _)| keep(l)).map(|(l, b)| (l.clone(), b.clone())).collect(),
        }
    }

    /// Apply a reversible classical map to every label.
    pub fn map_labels(&self, f: impl Fn(&Label) -> Label) -> Result<Self> {
        let mut branches = BTreeMap::new();
        for (label, b) in &self.branches {
            if branches.insert(f(label), b.clone()).is_some() {
                return Err(HilbertError::LabelCollision);
            }
        }
        Ok(Self { payload_qubits: self.payload_qubits, branches })
    }

    /// Apply a map to every payload. The map must preserve the norm.
    pub fn map_payloads(&self, f: impl Fn(&Label, &StateVector) -> Result<StateVector>) -> Result<Self> {
        let mut out: Option<Self> = None;
        for (label, b) in &self.branches {
            let payload = f(label, &b.payload)?;
            let target = out.get_or_insert_with(|| Self::new(payload.num_qubits()));
            target.add(label.clone(), b.amplitude, payload)?;
        }
        Ok(out.unwrap_or_else(|| Self::new(self.payload_qubits)))
    }

    /// Measure the classical label register.
    ///
    /// The surviving branch keeps its payload and the phase of its amplitude.
    pub fn measure_label(&self, rng: &mut impl Rng) -> Result<(Label, Self)> {
        if self.branches.is_empty() {
            return Err(HilbertError::ZeroState);
        }
        let weights: Vec<f64> = self.branches.values().map(Branch::weight).collect();
        let index = sample_weighted(&weights, rng);
        let (label, branch) = self.branches.iter().nth(index).expect("index in range");
        let phase = branch.amplitude / branch.amplitude.norm();
        let mut collapsed = Self::new(self.payload_qubits);
        collapsed.branches.insert(label.clone(), Branch { amplitude: phase, payload: branch.payload.clone() });
        Ok((label.clone(), collapsed))
    }

    /// Expand into a dense state. Each label part is read as a big-endian
    /// integer occupying `label_widths[i]` qubits; the payload follows.
    pub fn densify(&self, label_widths: &[usize]) -> Result<StateVector> {
        let mut widths = label_widths.to_vec();
        widths.push(self.payload_qubits);
        let layout = RegisterLayout::new(widths);
        let qubits = layout.total_qubits();
        if qubits > super::MAX_STATE_QUBITS {
            return Err(HilbertError::DimensionCap { qubits, cap: super::MAX_STATE_QUBITS });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        for (label, b) in &self.branches {
            if label.arity() != label_widths.len() {
                return Err(HilbertError::DimensionMismatch { expected: label_widths.len(), found: label.arity() });
            }
            let mut values: Vec<u64> = (0..label.arity())
                .map(|i| label.int(i).ok_or_else(|| HilbertError::Malformed("label part wider than 64 bits".into())))
                .collect::<Result<_>>()?;
            values.push(0);
            let base = layout.join(&values)?;
            for (offset, p) in b.payload.amplitudes().iter().enumerate() {
                amplitudes[base + offset] += b.amplitude * p;
            }
        }
        StateVector::normalized(qubits, amplitudes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::haar_sample;
    use crate::rng::lab_rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn label(v: u64) -> Label {
        Label::from_ints(&[(v, 1)])
    }

    #[test]
    fn measure_label_collapses() {
        let mut s = HybridState::new(1);
        s.add(label(0), c(FRAC_1_SQRT_2), StateVector::basis(1, 0).unwrap()).unwrap();
        s.add(label(1), c(FRAC_1_SQRT_2), StateVector::basis(1, 1).unwrap()).unwrap();
        assert!(s.is_normalized());
        let mut rng = lab_rng(4);
        let mut zeros = 0;
        for _ in 0..4000 {
            let (l, post) = s.measure_label(&mut rng).unwrap();
            let expected = StateVector::basis(1, l.int(0).unwrap() as usize).unwrap();
            assert_eq!(post.branch(&l).unwrap().payload, expected);
            assert_eq!(post.len(), 1);
            zeros += usize::from(l == label(0));
        }
        assert!((zeros as f64 / 4000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn merge_sums_amplitudes() {
        let mut s = HybridState::new(1);
        s.add(label(0), c(1.0), StateVector::basis(1, 0).unwrap()).unwrap();
        s.add(label(0), c(1.0), StateVector::basis(1, 1).unwrap()).unwrap();
        assert_eq!(s.len(), 1);
        let b = s.branch(&label(0)).unwrap();
        assert!((b.amplitude.norm() - 2f64.sqrt()).abs() < 1e-12);
        s.add(label(0), c(-1.0), StateVector::basis(1, 0).unwrap()).unwrap();
        s.add(label(0), c(-1.0), StateVector::basis(1, 1).unwrap()).unwrap();
        assert!(s.is_empty());
        assert!(s.add(label(0), c(1.0), StateVector::basis(2, 0).unwrap()).is_err());
    }

    #[test]
    fn densify_agrees_with_branchwise_inner_product() {
        let mut rng = lab_rng(8);
        for _ in 0..50 {
            let payload = rng.random_range(0..=3usize);
            let build = |rng: &mut crate::rng::LabRng| {
                let mut s = HybridState::new(payload);
                for _ in 0..6 {
                    let l = Label::from_ints(&[(rng.random_range(0..4u64), 1), (rng.random_range(0..16u64), 1)]);
                    let amp = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    let p = if payload == 0 { StateVector::unit() } else { haar_sample(payload, rng).unwrap() };
                    s.add(l, amp, p).unwrap();
                }
                s.normalize().unwrap()
            };
            let a = build(&mut rng);
            let b = build(&mut rng);
            let da = a.densify(&[2, 4]).unwrap();
            let db = b.densify(&[2, 4]).unwrap();
            assert!((a.inner(&b).unwrap() - da.inner(&db).unwrap()).norm() < 1e-9);
            assert!((a.inner(&a).unwrap().re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tensor_and_map() {
        let a = HybridState::product(label(1), StateVector::plus(1).unwrap());
        let b = HybridState::classical(label(0));
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.payload_qubits(), 1);
        assert!(ab.branch(&Label::from_ints(&[(1, 1), (0, 1)])).is_some());
        let swapped = ab.map_labels(|l| Label::new(vec![l.parts()[1].clone(), l.parts()[0].clone()])).unwrap();
        assert!(swapped.branch(&Label::from_ints(&[(0, 1), (1, 1)])).is_some());
        let collide = ab.tensor(&HybridState::classical(label(1)));
        assert!(collide.is_ok());
        let mut two = HybridState::new(0);
        two.add(label(0), c(FRAC_1_SQRT_2), StateVector::unit()).unwrap();
        two.add(label(1), c(FRAC_1_SQRT_2), StateVector::unit()).unwrap();
        assert_eq!(two.map_labels(|_| label(0)), Err(HilbertError::LabelCollision));
    }
}
