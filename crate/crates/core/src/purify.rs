//! Purification of sampled states, symmetrized copies, type-state
//! averages, and small-range response states.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hilbert::{
    haar_sample, hermitian_eigen, permutations, type_state, HilbertError, HybridState, Label, StateVector,
    MAX_DENSITY_QUBITS, MAX_STATE_QUBITS,
};
use crate::minischeme::{self, MiniError};
use crate::primitives::{hash, PprfKey, PrimitiveError, Prf};
use crate::prs::{prs_amplitudes, PrsError, PrsKey};
use crate::report::Estimate;

pub const C_SRD: f64 = 1.0;
pub const C_OSRD: f64 = 16.0 * C_SRD;
/// Largest PRS register whose branches are enumerated.
pub const MAX_PRS_QUBITS: usize = 12;
pub const MAX_PAYLOAD_QUBITS: usize = 6;
pub const MAX_COPIES: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PurifyError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Prs(#[from] PrsError),
    #[error(transparent)]
    Mini(#[from] MiniError),
    #[error("{what} = {value} exceeds the limit {limit}")]
    Cap { what: &'static str, value: usize, limit: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, PurifyError>;

fn cap(what: &'static str, value: usize, limit: usize) -> Result<()> {
    if value > limit {
        return Err(PurifyError::Cap { what, value, limit });
    }
    Ok(())
}

type Generator = dyn Fn(&[u8], &[u8]) -> Result<StateVector> + Send + Sync;

/// A state generator with classically determined output: `(z, r) ↦ |φ⟩`.
#[derive(Clone)]
pub struct StateGenerator {
    pub z: Vec<u8>,
    randomness_bytes: usize,
    payload_qubits: usize,
    generator: Arc<Generator>,
}

impl fmt::Debug for StateGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateGenerator")
            .field("z", &self.z)
            .field("randomness_bytes", &self.randomness_bytes)
            .field("payload_qubits", &self.payload_qubits)
            .finish_non_exhaustive()
    }
}

impl StateGenerator {
    pub fn new<F>(z: Vec<u8>, randomness_bytes: usize, payload_qubits: usize, generator: F) -> Result<Self>
    where
        F: Fn(&[u8], &[u8]) -> Result<StateVector> + Send + Sync + 'static,
    {
        cap("payload qubits", payload_qubits, MAX_PAYLOAD_QUBITS)?;
        if randomness_bytes == 0 {
            return Err(PurifyError::Invalid("generator needs at least one byte of randomness".into()));
        }
        Ok(Self { z, randomness_bytes, payload_qubits, generator: Arc::new(generator) })
    }

    /// Ignores its randomness.
    pub fn constant(state: StateVector) -> Result<Self> {
        let q = state.num_qubits();
        Self::new(Vec::new(), 1, q, move |_, _| Ok(state.clone()))
    }

    /// A Haar-distributed state seeded by `SHA-256(z ‖ r)`.
    pub fn seeded_haar(z: Vec<u8>, payload_qubits: usize) -> Result<Self> {
        Self::new(z, 16, payload_qubits, move |z, r| {
            let mut rng = ChaCha20Rng::from_seed(hash::tagged(hash::TAG_EXPAND, &[b"haar", z, r]));
            Ok(haar_sample(payload_qubits, &mut rng)?)
        })
    }

    /// Subspace banknote on `n` qubits.
    pub fn mini(n: usize) -> Result<Self> {
        Self::new(Vec::new(), 32, n, move |_, r| Ok(minischeme::mini_gen(n, r)?.note))
    }

    pub fn payload_qubits(&self) -> usize {
        self.payload_qubits
    }

    pub fn randomness_bytes(&self) -> usize {
        self.randomness_bytes
    }

    pub fn generate(&self, randomness: &[u8]) -> Result<StateVector> {
        if randomness.len() != self.randomness_bytes {
            return Err(PurifyError::Invalid(format!(
                "generator takes {} bytes of randomness, got {}",
                self.randomness_bytes,
                randomness.len()
            )));
        }
        let s = (self.generator)(&self.z, randomness)?;
        if s.num_qubits() != self.payload_qubits {
            return Err(PurifyError::Invalid(format!(
                "generator returned {} qubits, declared {}",
                s.num_qubits(),
                self.payload_qubits
            )));
        }
        Ok(s)
    }
}

fn label_width(bits: usize) -> usize {
    bits.div_ceil(8).max(1)
}

/// `Σ_x α_{k,x} |x⟩ ⊗ |GenState(z; F(K, x))⟩`.
pub fn purified_state(generator: &StateGenerator, prs_key: &PrsKey, pprf_key: &PprfKey) -> Result<HybridState> {
    let n = prs_key.num_qubits();
    cap("PRS qubits", n, MAX_PRS_QUBITS)?;
    if pprf_key.input_bits() != n || pprf_key.output_bits() != 8 * generator.randomness_bytes {
        return Err(PurifyError::Invalid(format!(
            "PPRF must map {n} bits to {} bits",
            8 * generator.randomness_bytes
        )));
    }
    let amplitudes = prs_amplitudes(prs_key)?;
    let mut state = HybridState::new(generator.payload_qubits);
    for (x, amp) in amplitudes.into_iter().enumerate() {
        let payload = generator.generate(&pprf_key.eval(x as u64)?)?;
        state.add(Label::from_ints(&[(x as u64, label_width(n))]), amp, payload)?;
    }
    Ok(state)
}

/// Draw `t` distinct `n`-bit strings.
pub fn distinct_labels(n: usize, t: usize, rng: &mut impl Rng) -> Result<Vec<u64>> {
    if n < 64 && t as u64 > 1u64 << n {
        return Err(PurifyError::Invalid(format!("cannot draw {t} distinct {n}-bit strings")));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(t);
    while out.len() < t {
        let x = if n >= 64 { rng.random() } else { rng.random_range(0..1u64 << n) };
        if seen.insert(x) {
            out.push(x);
        }
    }
    Ok(out)
}

/// `(1/√t!) Σ_π ⊗_i |x_{π(i)}⟩|φ_{π(i)}⟩` for the given labels.
///
/// Labels are the tuple `(x_{π(1)}, …, x_{π(t)})`; the payload is
/// `φ_{π(1)} ⊗ … ⊗ φ_{π(t)}`.
pub fn symmetrize(n: usize, xs: &[u64], samples: &[StateVector]) -> Result<HybridState> {
    let t = samples.len();
    cap("copies", t, MAX_COPIES)?;
    if xs.len() != t || t == 0 {
        return Err(PurifyError::Invalid(format!("{} labels for {t} samples", xs.len())));
    }
    if xs.iter().collect::<BTreeSet<_>>().len() != t {
        return Err(PurifyError::Invalid("labels must be distinct".into()));
    }
    let q = samples[0].num_qubits();
    if samples.iter().any(|s| s.num_qubits() != q) {
        return Err(PurifyError::Invalid("samples differ in size".into()));
    }
    cap("payload qubits", t * q, MAX_STATE_QUBITS)?;
    let perms = permutations(t);
    let amp = Complex64::new(1.0 / (perms.len() as f64).sqrt(), 0.0);
    let mut state = HybridState::new(t * q);
    for perm in perms {
        let label = Label::from_ints(&perm.iter().map(|&i| (xs[i], label_width(n))).collect::<Vec<_>>());
        let payload = perm[1..]
            .iter()
            .try_fold(samples[perm[0]].clone(), |acc, &i| acc.tensor(&samples[i]))?;
        state.add(label, amp, payload)?;
    }
    Ok(state)
}

/// Symmetrized copies over freshly drawn distinct labels.
pub fn simulate_copies(samples: &[StateVector], n: usize, rng: &mut impl Rng) -> Result<HybridState> {
    cap("copies", samples.len(), MAX_COPIES)?;
    let xs = distinct_labels(n, samples.len(), rng)?;
    symmetrize(n, &xs, samples)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub t: usize,
    pub payload_qubits: usize,
    pub labels: Vec<u64>,
    pub exact_gap: f64,
}

/// Build the distinct-type construction (a type state fed through the
/// coherent generator with a random function table) and the symmetrized
/// sample construction from one transcript, and measure their distance.
pub fn compiler_equivalence_check(
    generator: &StateGenerator,
    n: usize,
    t: usize,
    rng: &mut impl Rng,
) -> Result<EquivalenceReport> {
    let q = generator.payload_qubits;
    cap("copies", t, MAX_COPIES)?;
    cap("total qubits", t * (n + q), MAX_STATE_QUBITS)?;
    if t == 0 || n == 0 {
        return Err(PurifyError::Invalid("need n ≥ 1 and t ≥ 1".into()));
    }
    // Truly random function table R: {0,1}^n → randomness.
    let table: Vec<Vec<u8>> = (0..1u64 << n)
        .map(|_| (0..generator.randomness_bytes).map(|_| rng.random()).collect())
        .collect();
    let xs = distinct_labels(n, t, rng)?;
    let payload_of = |x: u64| generator.generate(&table[x as usize]);

    let samples = xs.iter().map(|&x| payload_of(x)).collect::<Result<Vec<_>>>()?;
    let simulated = symmetrize(n, &xs, &samples)?.densify(&vec![n; t])?;

    let typed = type_state(n, &xs)?;
    let mut direct = vec![Complex64::new(0.0, 0.0); 1 << (t * (n + q))];
    let mask = (1u64 << n) - 1;
    for (index, amp) in typed.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let regs: Vec<u64> = (0..t).rev().map(|i| (index as u64 >> (i * n)) & mask).collect();
        let mut payload = vec![*amp];
        for &x in &regs {
            let phi = payload_of(x)?;
            payload = payload.iter().flat_map(|a| phi.amplitudes().iter().map(move |b| a * b)).collect();
        }
        let base = index << (t * q);
        for (offset, a) in payload.into_iter().enumerate() {
            direct[base + offset] += a;
        }
    }
    let direct = StateVector::new(t * (n + q), direct)?;
    Ok(EquivalenceReport { n, t, payload_qubits: q, labels: xs, exact_gap: direct.distance(&simulated)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeHaarMethod {
    /// Occupation-number basis of the symmetric subspace.
    Symmetric,
    /// Dense `2^{nt}`-dimensional matrices and an eigensolver.
    Dense,
    /// Dense, with the Haar average replaced by this many samples.
    MonteCarlo(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeHaarReport {
    pub n: usize,
    pub t: usize,
    pub method: TypeHaarMethod,
    pub td_estimate: f64,
    /// `4·t²/2ⁿ`.
    pub bound: f64,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Visit every nondecreasing `t`-tuple over `0..d`.
fn for_each_multiset(d: u64, t: usize, mut f: impl FnMut(&[u64])) {
    let mut cur = vec![0u64; t];
    loop {
        f(&cur);
        let mut i = t;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] + 1 < d {
                let v = cur[i] + 1;
                cur[i..].iter_mut().for_each(|c| *c = v);
                break;
            }
        }
    }
}

/// Trace distance between the `t`-copy Haar average and the uniform
/// average of `t`-fold products of type states over distinct tuples.
pub fn type_vs_haar_distance(
    n: usize,
    t: usize,
    method: TypeHaarMethod,
    rng: &mut impl Rng,
) -> Result<TypeHaarReport> {
    if n == 0 || t == 0 {
        return Err(PurifyError::Invalid("need n ≥ 1 and t ≥ 1".into()));
    }
    cap("copies", t, MAX_COPIES)?;
    if t as u64 > 1u64 << n {
        return Err(PurifyError::Invalid(format!("no {t} distinct {n}-bit strings")));
    }
    let bound = 4.0 * (t * t) as f64 / (1u64 << n) as f64;
    let td_estimate = match method {
        TypeHaarMethod::Symmetric => symmetric_route(n, t)?,
        TypeHaarMethod::Dense => dense_route(n, t, None::<(usize, &mut ChaCha20Rng)>)?,
        TypeHaarMethod::MonteCarlo(samples) => dense_route(n, t, Some((samples, rng)))?,
    };
    Ok(TypeHaarReport { n, t, method, td_estimate, bound })
}

fn symmetric_route(n: usize, t: usize) -> Result<f64> {
    cap("multiset enumeration bits", n * t, 24)?;
    let d = 1u64 << n;
    let sym_dim = binomial(d + t as u64 - 1, t as u64);
    let distinct = binomial(d, t as u64);
    // Both averages are diagonal in the occupation basis: the Haar average
    // is uniform on all multisets, the type average on those without
    // repeats.
    let mut td = 0.0;
    for_each_multiset(d, t, |m| {
        let repeats = m.windows(2).any(|w| w[0] == w[1]);
        let p_type = if repeats { 0.0 } else { 1.0 / distinct };
        td += (p_type - 1.0 / sym_dim).abs();
    });
    Ok(0.5 * td)
}

fn dense_route(n: usize, t: usize, monte_carlo: Option<(usize, &mut impl Rng)>) -> Result<f64> {
    cap("dense qubits", n * t, MAX_DENSITY_QUBITS)?;
    let dim = 1usize << (n * t);
    let mask = (1usize << n) - 1;
    let split = |index: usize| -> Vec<usize> { (0..t).rev().map(|i| (index >> (i * n)) & mask).collect() };
    let join = |regs: &[usize]| -> usize { regs.iter().fold(0, |acc, &r| (acc << n) | r) };

    let haar = match monte_carlo {
        None => {
            let perms = permutations(t);
            let sym_dim = binomial((1u64 << n) + t as u64 - 1, t as u64);
            let weight = Complex64::new(1.0 / (perms.len() as f64 * sym_dim), 0.0);
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for col in 0..dim {
                let regs = split(col);
                for p in &perms {
                    let permuted: Vec<usize> = p.iter().map(|&i| regs[i]).collect();
                    m[(join(&permuted), col)] += weight;
                }
            }
            m
        }
        Some((samples, rng)) => {
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            for _ in 0..samples {
                let psi = haar_sample(n, rng)?;
                let copies = (1..t).try_fold(psi.clone(), |acc, _| acc.tensor(&psi))?;
                let v = DVector::from_column_slice(copies.amplitudes());
                m += &v * v.adjoint();
            }
            m.unscale(samples as f64)
        }
    };

    let mut typed = DMatrix::<Complex64>::zeros(dim, dim);
    let mut count = 0usize;
    for_each_multiset(1u64 << n, t, |m| {
        if m.windows(2).any(|w| w[0] == w[1]) {
            return;
        }
        let s = type_state(n, m).expect("distinct labels");
        let support: Vec<(usize, Complex64)> =
            s.amplitudes().iter().copied().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).collect();
        for &(i, a) in &support {
            for &(j, b) in &support {
                typed[(i, j)] += a * b.conj();
            }
        }
        count += 1;
    });
    typed.unscale_mut(count as f64);

    let (values, _) = hermitian_eigen(&(haar - typed));
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmallRangeParams {
    pub k: usize,
    pub ell: usize,
    pub accuracy: f64,
    pub x_bits: usize,
}

impl SmallRangeParams {
    /// `ℓ = C_OSRD · p² · k³`.
    pub fn from_accuracy(k: usize, accuracy: f64, x_bits: usize, c_osrd: f64) -> Self {
        let ell = (c_osrd * accuracy * accuracy * (k * k * k) as f64).ceil() as usize;
        Self { k, ell, accuracy, x_bits }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallRangeOutcome {
    pub phi: HybridState,
    pub phi0: HybridState,
    pub overlap: f64,
}

/// `|φ⟩ = ⊗_i Σ_x α^i_x |x⟩|ψ_{P(x)}⟩` and its restriction `|φ₀⟩` to the
/// branches where `P(x_1), …, P(x_k)` are pairwise distinct.
pub fn small_range_states(
    params: &SmallRangeParams,
    query_amplitudes: &[Vec<Complex64>],
    sample_states: &[StateVector],
    index_map: &[usize],
) -> Result<SmallRangeOutcome> {
    let (k, ell) = (params.k, params.ell);
    cap("X bits", params.x_bits, 8)?;
    cap("queries", k, 3)?;
    cap("range", ell, 64)?;
    let x_size = 1usize << params.x_bits;
    if query_amplitudes.len() != k || query_amplitudes.iter().any(|a| a.len() != x_size) {
        return Err(PurifyError::Invalid(format!("need {k} amplitude lists over {x_size} points")));
    }
    if sample_states.len() != ell || index_map.len() != x_size || index_map.iter().any(|&i| i >= ell) {
        return Err(PurifyError::Invalid("sample states or index map have the wrong shape".into()));
    }
    let q = sample_states[0].num_qubits();
    cap("payload qubits", q, 3)?;
    if sample_states.iter().any(|s| s.num_qubits() != q) {
        return Err(PurifyError::Invalid("sample states differ in size".into()));
    }
    let width = label_width(params.x_bits);
    let mut phi = HybridState::classical(Label::new(Vec::new()));
    for amps in query_amplitudes {
        let mut single = HybridState::new(q);
        for (x, &a) in amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                single.add(Label::from_ints(&[(x as u64, width)]), a, sample_states[index_map[x]].clone())?;
            }
        }
        phi = phi.tensor(&single.normalize()?)?;
    }
    let distinct = |label: &Label| {
        let images: BTreeSet<usize> = (0..k).map(|i| index_map[label.int(i).expect("label part") as usize]).collect();
        images.len() == k
    };
    let restricted = phi.filter(distinct);
    let phi0 = restricted.normalize()?;
    let overlap = phi.inner(&phi0)?.norm_sqr();
    Ok(SmallRangeOutcome { phi, phi0, overlap })
}

/// Mean of `|⟨φ|φ₀⟩|²` over uniformly random index maps, with uniform
/// query amplitudes and fresh Haar sample states per trial.
pub fn small_range_overlap_experiment(
    params: &SmallRangeParams,
    payload_qubits: usize,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<Estimate> {
    let x_size = 1usize << params.x_bits;
    let amp = Complex64::new((x_size as f64).sqrt().recip(), 0.0);
    let queries = vec![vec![amp; x_size]; params.k];
    let mut overlaps = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let samples = (0..params.ell).map(|_| haar_sample(payload_qubits, rng)).collect::<std::result::Result<Vec<_>, _>>()?;
        let index_map: Vec<usize> = (0..x_size).map(|_| rng.random_range(0..params.ell)).collect();
        overlaps.push(small_range_states(params, &queries, &samples, &index_map)?.overlap);
    }
    Ok(Estimate::from_samples(&overlaps))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SrdReport {
    pub k: usize,
    pub ell: usize,
    pub domain_bits: usize,
    pub output_bits: usize,
    pub full_collision_rate: Estimate,
    pub small_range_collision_rate: Estimate,
    pub advantage: f64,
    pub advantage_stderr: f64,
    pub envelope: f64,
}

/// Collision-finding distinguisher between a fully random table and a
/// small-range table, with outputs uniform on `output_bits`.
pub fn classical_srd_experiment(
    k: usize,
    ell: usize,
    domain_bits: usize,
    output_bits: usize,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<SrdReport> {
    if ell == 0 || k == 0 || domain_bits == 0 || domain_bits > 62 || output_bits == 0 || output_bits > 64 {
        return Err(PurifyError::Invalid("need k, ℓ ≥ 1, domain bits in 1..=62, output bits in 1..=64".into()));
    }
    if k as u64 > 1u64 << domain_bits {
        return Err(PurifyError::Invalid("more queries than domain points".into()));
    }
    let draw = |rng: &mut dyn rand::RngCore| -> u64 {
        let v = rng.next_u64();
        if output_bits == 64 {
            v
        } else {
            v >> (64 - output_bits)
        }
    };
    let collides = |values: &[u64]| values.iter().collect::<BTreeSet<_>>().len() < values.len();
    let (mut full_hits, mut small_hits) = (0u64, 0u64);
    for _ in 0..trials {
        let points = distinct_labels(domain_bits, k, rng)?;
        let full: Vec<u64> = points.iter().map(|_| draw(rng)).collect();
        full_hits += u64::from(collides(&full));
        // Small range: P maps each queried point to one of ℓ samples.
        let samples: Vec<u64> = (0..ell).map(|_| draw(rng)).collect();
        let small: Vec<u64> = points.iter().map(|_| samples[rng.random_range(0..ell)]).collect();
        small_hits += u64::from(collides(&small));
    }
    let full = Estimate::bernoulli(full_hits, trials);
    let small = Estimate::bernoulli(small_hits, trials);
    Ok(SrdReport {
        k,
        ell,
        domain_bits,
        output_bits,
        advantage: (small.mean - full.mean).abs(),
        advantage_stderr: (small.stderr.powi(2) + full.stderr.powi(2)).sqrt(),
        full_collision_rate: full,
        small_range_collision_rate: small,
        envelope: C_SRD * (k * k * k) as f64 / ell as f64,
    })
}
