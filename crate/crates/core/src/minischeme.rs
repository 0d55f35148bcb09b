//! Subspace-state banknotes with the subspace published in the clear.
//!
//! Vectors of GF(2)^n are stored as integers, coordinate `i` in bit `i`, so
//! the basis state `|a⟩` is amplitude index `a`. The serial number lists a
//! row-reduced basis of `A`, which makes the scheme forgeable by anyone who
//! reads it: only the naive attacks below are measured.
//!
//! Serial number encoding: `n:u8`, then `n/2` rows of `⌈n/8⌉` little-endian
//! bytes each, in echelon order (leading bit descending).

use bytes::Bytes;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hilbert::{HilbertError, StateVector};
use crate::primitives::hash;

pub const MAX_AMBIENT_BITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiniError {
    #[error("ambient dimension {0} must be even and in 2..={MAX_AMBIENT_BITS}")]
    AmbientDimension(usize),
    #[error("note has {found} qubits, serial number says {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed serial number: {0}")]
    Malformed(String),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

pub type Result<T> = std::result::Result<T, MiniError>;

fn leading_bit(v: u64) -> u32 {
    63 - v.leading_zeros()
}

/// Row-reduce `rows` in place; returns the independent rows sorted by
/// leading bit, descending, with each leading bit cleared from every other
/// row.
fn rref(rows: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            if v >> leading_bit(b) & 1 == 1 {
                v ^= b;
            }
        }
        if v == 0 {
            continue;
        }
        let lead = leading_bit(v);
        for b in &mut basis {
            if *b >> lead & 1 == 1 {
                *b ^= v;
            }
        }
        basis.push(v);
    }
    basis.sort_by(|a, b| b.cmp(a));
    basis
}

fn dot(a: u64, b: u64) -> u32 {
    (a & b).count_ones() & 1
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    n: usize,
    basis: Vec<u64>,
    dual_basis: Vec<u64>,
}

impl Subspace {
    /// Span of `rows` inside GF(2)^n.
    pub fn span(n: usize, rows: &[u64]) -> Result<Self> {
        if n == 0 || n > MAX_AMBIENT_BITS {
            return Err(MiniError::AmbientDimension(n));
        }
        if rows.iter().any(|&r| r >> n != 0) {
            return Err(MiniError::Malformed("row wider than n bits".into()));
        }
        let basis = rref(rows);
        let pivots: Vec<u32> = basis.iter().map(|&b| leading_bit(b)).collect();
        let dual: Vec<u64> = (0..n as u32)
            .filter(|f| !pivots.contains(f))
            .map(|f| {
                basis
                    .iter()
                    .zip(&pivots)
                    .filter(|(b, _)| *b >> f & 1 == 1)
                    .fold(1u64 << f, |d, (_, &p)| d | 1 << p)
            })
            .collect();
        Ok(Self { n, basis, dual_basis: rref(&dual) })
    }

    pub fn ambient_bits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn dual_basis(&self) -> &[u64] {
        &self.dual_basis
    }

    pub fn contains(&self, v: u64) -> bool {
        self.basis.iter().fold(v, |acc, &b| if acc >> leading_bit(b) & 1 == 1 { acc ^ b } else { acc }) == 0
    }

    pub fn dual_contains(&self, v: u64) -> bool {
        self.basis.iter().all(|&b| dot(b, v) == 0)
    }

    pub fn dual(&self) -> Self {
        Self { n: self.n, basis: self.dual_basis.clone(), dual_basis: self.basis.clone() }
    }

    /// All `2^dim` elements, in Gray-code order from 0.
    pub fn elements(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(1 << self.dim());
        let mut v = 0u64;
        out.push(v);
        for i in 1u64..1 << self.dim() {
            v ^= self.basis[i.trailing_zeros() as usize];
            out.push(v);
        }
        out
    }

    /// `|A⟩`.
    pub fn state(&self) -> StateVector {
        let amp = Complex64::new((0.5f64).powf(self.dim() as f64 / 2.0), 0.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n];
        for a in self.elements() {
            amps[a as usize] = amp;
        }
        StateVector::new(self.n, amps).expect("subspace state is normalized")
    }

    /// Basis rows concatenated into one integer, first row most significant.
    pub fn packed_rows(&self) -> u64 {
        self.basis.iter().fold(0u64, |acc, &r| (acc << self.n) | r)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.n.div_ceil(8);
        let mut out = vec![self.n as u8];
        for r in &self.basis {
            out.extend_from_slice(&r.to_le_bytes()[..w]);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (&n, rows) = bytes.split_first().ok_or_else(|| MiniError::Malformed("empty".into()))?;
        let n = n as usize;
        if n == 0 || n > MAX_AMBIENT_BITS {
            return Err(MiniError::AmbientDimension(n));
        }
        let w = n.div_ceil(8);
        if rows.len() % w != 0 {
            return Err(MiniError::Malformed(format!("{} row bytes for width {w}", rows.len())));
        }
        let parsed: Vec<u64> = rows
            .chunks_exact(w)
            .map(|c| c.iter().rev().fold(0u64, |acc, &b| (acc << 8) | u64::from(b)))
            .collect();
        let s = Self::span(n, &parsed)?;
        if s.basis != parsed {
            return Err(MiniError::Malformed("rows are not in reduced echelon form".into()));
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiniBanknote {
    pub sn: Bytes,
    pub subspace: Subspace,
    pub note: StateVector,
}

/// Deterministic banknote: a uniformly random `n/2`-dimensional subspace
/// drawn from `randomness`.
pub fn mini_gen(n: usize, randomness: &[u8]) -> Result<MiniBanknote> {
    if n % 2 != 0 || n == 0 || n > MAX_AMBIENT_BITS {
        return Err(MiniError::AmbientDimension(n));
    }
    let mut rng = ChaCha20Rng::from_seed(hash::tagged(hash::TAG_EXPAND, &[b"mini", randomness]));
    let mut rows: Vec<u64> = Vec::with_capacity(n / 2);
    for r in 0..n / 2 {
        let span = Subspace::span(n, &rows)?;
        // Pick the u-th vector outside the current span; there are
        // 2^n − 2^r of them.
        let mut u = rng.random_range(0..(1u64 << n) - (1u64 << r));
        let v = (0..1u64 << n)
            .filter(|&v| !span.contains(v))
            .find(|_| {
                let hit = u == 0;
                u = u.wrapping_sub(1);
                hit
            })
            .expect("index below the complement size");
        rows.push(v);
    }
    let subspace = Subspace::span(n, &rows)?;
    Ok(MiniBanknote { sn: Bytes::from(subspace.to_bytes()), note: subspace.state(), subspace })
}

fn check_note(sub: &Subspace, note: &[Complex64]) -> Result<()> {
    if note.len() != 1 << sub.n {
        return Err(MiniError::DimensionMismatch {
            expected: sub.n,
            found: note.len().trailing_zeros() as usize,
        });
    }
    Ok(())
}

/// The composed check `Π_A H Π_{A⊥} H Π_A = |A⟩⟨A|` applied to an
/// unnormalized vector.
pub fn verify_projector(sub: &Subspace, amps: &[Complex64]) -> Result<Vec<Complex64>> {
    check_note(sub, amps)?;
    let elems = sub.elements();
    let scale = (0.5f64).powf(sub.dim() as f64 / 2.0);
    let overlap: Complex64 = elems.iter().map(|&a| amps[a as usize]).sum::<Complex64>() * scale;
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for &a in &elems {
        out[a as usize] = overlap * scale;
    }
    Ok(out)
}

/// `|⟨A|ψ⟩|²`.
pub fn accept_probability(sub: &Subspace, note: &StateVector) -> Result<f64> {
    let projected = verify_projector(sub, note.amplitudes())?;
    Ok(projected.iter().map(|a| a.norm_sqr()).sum())
}

fn project_primal(sub: &Subspace, amps: &[Complex64]) -> Vec<Complex64> {
    amps.iter().enumerate().map(|(i, &a)| if sub.contains(i as u64) { a } else { Complex64::new(0.0, 0.0) }).collect()
}

fn hadamard(n: usize, amps: Vec<Complex64>) -> Vec<Complex64> {
    let scale = 1.0 / (2f64).powf(n as f64 / 2.0);
    let mut v = amps;
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
    v.iter_mut().for_each(|a| *a *= scale);
    v
}

fn weight(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// Sequential check: `Π_A`, Hadamard, `Π_{A⊥}`, Hadamard. Returns the bit
/// and the post-measurement state.
pub fn mini_verify(sub: &Subspace, note: &StateVector, rng: &mut impl Rng) -> Result<(bool, StateVector)> {
    check_note(sub, note.amplitudes())?;
    let n = sub.n;
    let total = weight(note.amplitudes());
    let primal = project_primal(sub, note.amplitudes());
    let p1 = weight(&primal) / total;
    if rng.random::<f64>() >= p1 || p1 < crate::hilbert::MIN_OUTCOME_PROB {
        let rest: Vec<_> = note.amplitudes().iter().zip(&primal).map(|(a, b)| a - b).collect();
        return Ok((false, StateVector::normalized(n, rest)?));
    }
    let dual = sub.dual();
    let h = hadamard(n, primal);
    let hd = project_primal(&dual, &h);
    let p2 = weight(&hd) / weight(&h);
    if rng.random::<f64>() >= p2 || p2 < crate::hilbert::MIN_OUTCOME_PROB {
        let rest: Vec<_> = h.iter().zip(&hd).map(|(a, b)| a - b).collect();
        return Ok((false, StateVector::normalized(n, hadamard(n, rest))?));
    }
    Ok((true, StateVector::normalized(n, hadamard(n, hd))?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloneStrategy {
    /// Measure in the computational basis, emit the outcome twice.
    MeasureClone,
    /// Keep the note, emit `|0…0⟩` as the second.
    ZeroPad,
    /// Measure in the Hadamard basis, emit the outcome twice.
    HadamardClone,
}

impl std::str::FromStr for CloneStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "measure-clone" => Ok(Self::MeasureClone),
            "zero-pad" => Ok(Self::ZeroPad),
            "hadamard-clone" => Ok(Self::HadamardClone),
            other => Err(format!("unknown strategy {other}")),
        }
    }
}

pub fn mini_counterfeit(
    strategy: CloneStrategy,
    note: &StateVector,
    rng: &mut impl Rng,
) -> Result<(StateVector, StateVector)> {
    let n = note.num_qubits();
    Ok(match strategy {
        CloneStrategy::ZeroPad => (note.clone(), StateVector::basis(n, 0)?),
        CloneStrategy::MeasureClone => {
            let (_, collapsed) = note.measure_all(rng);
            (collapsed.clone(), collapsed)
        }
        CloneStrategy::HadamardClone => {
            let (_, collapsed) = note.hadamard_all().measure_all(rng);
            let back = collapsed.hadamard_all();
            (back.clone(), back)
        }
    })
}
