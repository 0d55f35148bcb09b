//! Quantum coins: a superposition over identifiers of signed subspace
//! banknotes.
//!
//! Each branch carries the label `(x, sn_x, sig_x)` and the payload
//! `|$_x⟩`, where `(sn_x, $_x) = MiniGen(F(K, x))` and `sig_x` signs the
//! packed basis rows of `sn_x`. The `Prs` variant weights branch `x` by a
//! phase-state amplitude; `EqSup` weights every branch by `2^{-ν/2}`.

use std::collections::HashMap;

use bytes::Bytes;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::Serialize;
use thiserror::Error;

use crate::detsig::{self, DetsigError, TreeParams, TreeSigSecretKey, TreeSigVerifyKey};
use crate::hilbert::{HilbertError, HybridState, Label, StateVector, MIN_OUTCOME_PROB};
use crate::minischeme::{self, MiniError, Subspace};
use crate::primitives::{PprfKey, PrimitiveError, Prf};
use crate::prs::{prs_amplitudes, prs_setup, PrsError, PrsKey};

pub const MAX_ID_BITS: usize = 6;
pub const MAX_MINI_BITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoinError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Detsig(#[from] DetsigError),
    #[error(transparent)]
    Mini(#[from] MiniError),
    #[error(transparent)]
    Prs(#[from] PrsError),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("candidate has the wrong shape: {0}")]
    Shape(String),
    #[error("attack returned {found} states, expected {expected}")]
    Arity { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, CoinError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoinVariant {
    Prs,
    Eqsup,
}

impl std::str::FromStr for CoinVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "prs" => Ok(Self::Prs),
            "eqsup" => Ok(Self::Eqsup),
            other => Err(format!("unknown variant {other}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoinParams {
    pub id_bits: usize,
    pub mini_n: usize,
    /// One-time signature digest bits inside the signer.
    pub digest_bits: usize,
    pub lambda: usize,
}

impl Default for CoinParams {
    fn default() -> Self {
        Self { id_bits: 4, mini_n: 8, digest_bits: 32, lambda: 128 }
    }
}

impl CoinParams {
    fn check(&self) -> Result<()> {
        if self.id_bits == 0 || self.id_bits > MAX_ID_BITS {
            return Err(CoinError::InvalidParameters(format!("id bits {} not in 1..={MAX_ID_BITS}", self.id_bits)));
        }
        if self.mini_n < 2 || self.mini_n > MAX_MINI_BITS || self.mini_n % 2 != 0 {
            return Err(CoinError::InvalidParameters(format!(
                "mini n {} must be even and in 2..={MAX_MINI_BITS}",
                self.mini_n
            )));
        }
        Ok(())
    }

    /// The signed message is the packed basis of an `n/2`-dimensional
    /// subspace.
    pub fn message_bits(&self) -> usize {
        self.mini_n * self.mini_n / 2
    }

    fn tree_params(&self) -> Result<TreeParams> {
        Ok(TreeParams::new(self.message_bits(), self.lambda, self.digest_bits)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoinSecretKey {
    variant: CoinVariant,
    params: CoinParams,
    sgk: TreeSigSecretKey,
    k: PprfKey,
    prs: Option<PrsKey>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoinVerifyKey {
    vk: TreeSigVerifyKey,
    params: CoinParams,
}

pub fn coin_setup(
    variant: CoinVariant,
    params: CoinParams,
    rng: &mut impl RngCore,
) -> Result<(CoinVerifyKey, CoinSecretKey)> {
    params.check()?;
    let (vk, sgk) = detsig::setup(params.tree_params()?, rng)?;
    let k = PprfKey::generate(params.id_bits, 256, rng)?;
    let prs = match variant {
        CoinVariant::Prs => Some(prs_setup(params.id_bits, rng)?),
        CoinVariant::Eqsup => None,
    };
    Ok((CoinVerifyKey { vk, params }, CoinSecretKey { variant, params, sgk, k, prs }))
}

impl CoinSecretKey {
    pub fn variant(&self) -> CoinVariant {
        self.variant
    }

    pub fn params(&self) -> CoinParams {
        self.params
    }

    pub fn prs_key(&self) -> Option<&PrsKey> {
        self.prs.as_ref()
    }

    pub fn signer(&self) -> &TreeSigSecretKey {
        &self.sgk
    }

    /// `(sn_x, $_x, sig_x)` for identifier `x`.
    pub fn branch(&self, x: u64) -> Result<(Subspace, StateVector, Bytes)> {
        let seed = self.k.eval(x)?;
        let note = minischeme::mini_gen(self.params.mini_n, &seed)?;
        let sig = self.sgk.sign(note.subspace.packed_rows())?;
        Ok((note.subspace, note.note, sig.to_bytes()))
    }
}

impl CoinVerifyKey {
    pub fn params(&self) -> CoinParams {
        self.params
    }

    pub fn signature_key(&self) -> &TreeSigVerifyKey {
        &self.vk
    }
}

/// A coin state with labels `(x, sn, sig)` and a banknote payload.
#[derive(Clone, Debug, PartialEq)]
pub struct Coin {
    pub state: HybridState,
}

pub fn id_label(x: u64) -> Bytes {
    Bytes::copy_from_slice(&[x as u8])
}

pub fn gen_banknote(sk: &CoinSecretKey) -> Result<Coin> {
    let p = sk.params;
    let amplitudes = match &sk.prs {
        Some(k) => prs_amplitudes(k)?,
        None => vec![Complex64::new((0.5f64).powf(p.id_bits as f64 / 2.0), 0.0); 1 << p.id_bits],
    };
    let mut state = HybridState::new(p.mini_n);
    for (x, amp) in amplitudes.into_iter().enumerate() {
        let (sub, note, sig) = sk.branch(x as u64)?;
        let label = Label::new(vec![id_label(x as u64), Bytes::from(sub.to_bytes()), sig]);
        state.add(label, amp, note)?;
    }
    Ok(Coin { state })
}

/// Result of projecting a candidate onto the acceptance subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub accepted: bool,
    pub post_state: HybridState,
    pub accept_probability: f64,
}

/// Coin verifier that remembers which `(sn, sig)` pairs it has checked.
pub struct Verifier<'a> {
    vk: &'a CoinVerifyKey,
    cache: HashMap<(Bytes, Bytes), Option<Subspace>>,
}

impl<'a> Verifier<'a> {
    pub fn new(vk: &'a CoinVerifyKey) -> Self {
        Self { vk, cache: HashMap::new() }
    }

    /// The subspace named by `sn` if `sig` is a valid signature on it.
    fn valid_subspace(&mut self, sn: &Bytes, sig: &Bytes) -> Option<Subspace> {
        let vk = self.vk;
        self.cache
            .entry((sn.clone(), sig.clone()))
            .or_insert_with(|| {
                let sub = Subspace::from_bytes(sn).ok()?;
                if sub.ambient_bits() != vk.params.mini_n || sub.dim() != vk.params.mini_n / 2 {
                    return None;
                }
                vk.vk.verify(sub.packed_rows(), sig).then_some(sub)
            })
            .clone()
    }

    /// `Π|c⟩` and `(I − Π)|c⟩`, unnormalized.
    pub fn split(&mut self, candidate: &HybridState) -> Result<(HybridState, HybridState)> {
        let n = self.vk.params.mini_n;
        if candidate.payload_qubits() != n {
            return Err(CoinError::Shape(format!("payload has {} qubits, expected {n}", candidate.payload_qubits())));
        }
        let mut accept = HybridState::new(n);
        let mut reject = HybridState::new(n);
        for (label, branch) in candidate.branches() {
            if label.arity() != 3 {
                return Err(CoinError::Shape(format!("label has {} parts, expected 3", label.arity())));
            }
            let weighted = branch.weighted();
            match self.valid_subspace(&label.parts()[1], &label.parts()[2]) {
                Some(sub) => {
                    let projected = minischeme::verify_projector(&sub, &weighted)?;
                    let rest: Vec<Complex64> = weighted.iter().zip(&projected).map(|(a, b)| a - b).collect();
                    accept.add_weighted(label.clone(), projected)?;
                    reject.add_weighted(label.clone(), rest)?;
                }
                None => reject.add_weighted(label.clone(), weighted)?,
            }
        }
        Ok((accept, reject))
    }

    pub fn accept_probability(&mut self, candidate: &HybridState) -> Result<f64> {
        let (accept, _) = self.split(candidate)?;
        Ok((accept.norm_sqr() / candidate.norm_sqr()).clamp(0.0, 1.0))
    }

    pub fn verify(&mut self, candidate: &HybridState, rng: &mut impl Rng) -> Result<Verdict> {
        let (accept, reject) = self.split(candidate)?;
        let p = (accept.norm_sqr() / candidate.norm_sqr()).clamp(0.0, 1.0);
        let accepted = if p >= 1.0 - MIN_OUTCOME_PROB {
            true
        } else if p < MIN_OUTCOME_PROB {
            false
        } else {
            rng.random::<f64>() < p
        };
        let post_state = if accepted { accept.normalize()? } else { reject.normalize()? };
        Ok(Verdict { accepted, post_state, accept_probability: p })
    }
}

pub fn coin_verify(vk: &CoinVerifyKey, candidate: &HybridState, rng: &mut impl Rng) -> Result<Verdict> {
    Verifier::new(vk).verify(candidate, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoinAttack {
    /// Measure one coin's labels, keep it, and add the same labels over
    /// `|0…0⟩`.
    ZeroPad,
    /// Measure one coin completely and emit the outcome twice.
    MeasureClone,
    /// Emit unsigned junk.
    Null,
}

impl std::str::FromStr for CoinAttack {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zero-pad" => Ok(Self::ZeroPad),
            "measure-clone" => Ok(Self::MeasureClone),
            "null" => Ok(Self::Null),
            other => Err(format!("unknown attack {other}")),
        }
    }
}

fn junk(n: usize) -> Result<HybridState> {
    let label = Label::new(vec![id_label(0), Bytes::new(), Bytes::new()]);
    Ok(HybridState::product(label, StateVector::basis(n, 0)?))
}

/// Run a named attack on `coins`, producing `coins.len() + 1` candidates.
pub fn run_attack<R: Rng + ?Sized>(attack: CoinAttack, coins: Vec<HybridState>, n: usize, rng: &mut R) -> Result<Vec<HybridState>> {
    let mut rng = rng;
    let mut coins = coins;
    match attack {
        CoinAttack::Null => {
            coins.push(junk(n)?);
        }
        CoinAttack::ZeroPad => match coins.pop() {
            None => coins.push(junk(n)?),
            Some(c) => {
                let (label, collapsed) = c.measure_label(&mut rng)?;
                coins.push(collapsed);
                coins.push(HybridState::product(label, StateVector::basis(n, 0)?));
            }
        },
        CoinAttack::MeasureClone => match coins.pop() {
            None => coins.push(junk(n)?),
            Some(c) => {
                let (label, collapsed) = c.measure_label(&mut rng)?;
                let payload = &collapsed.branch(&label).expect("collapsed branch").payload;
                let (_, basis) = payload.measure_all(&mut rng);
                let clone = HybridState::product(label, basis);
                coins.push(clone.clone());
                coins.push(clone);
            }
        },
    }
    Ok(coins)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterfeitOutcome {
    pub success: bool,
    pub accept_probabilities: Vec<f64>,
}

/// Hand out `t` copies of `coin`, let `attack` produce states, and verify
/// `t + 1` of them in sequence. The verifier may be shared across games;
/// it only memoizes classical signature checks.
pub fn counterfeit_game<A>(
    verifier: &mut Verifier<'_>,
    coin: &Coin,
    t: usize,
    attack: A,
    rng: &mut impl Rng,
) -> Result<CounterfeitOutcome>
where
    A: FnOnce(Vec<HybridState>, &mut dyn RngCore) -> Result<Vec<HybridState>>,
{
    let coins = vec![coin.state.clone(); t];
    let mut dyn_rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::from_rng(rng);
    let outputs = attack(coins, &mut dyn_rng)?;
    if outputs.len() != t + 1 {
        return Err(CoinError::Arity { expected: t + 1, found: outputs.len() });
    }
    let mut success = true;
    let mut accept_probabilities = Vec::with_capacity(t + 1);
    for candidate in &outputs {
        let verdict = verifier.verify(candidate, rng)?;
        accept_probabilities.push(verdict.accept_probability);
        success &= verdict.accepted;
    }
    Ok(CounterfeitOutcome { success, accept_probabilities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::lab_rng;
    use rand::SeedableRng;

    fn small() -> CoinParams {
        CoinParams { id_bits: 2, mini_n: 4, digest_bits: 16, lambda: 64 }
    }

    #[test]
    fn honest_coins_verify_and_repeat() {
        for variant in [CoinVariant::Prs, CoinVariant::Eqsup] {
            let mut rng = lab_rng(1);
            let (vk, sk) = coin_setup(variant, small(), &mut rng).unwrap();
            assert_eq!(sk.prs_key().is_some(), variant == CoinVariant::Prs);
            let a = gen_banknote(&sk).unwrap();
            let b = gen_banknote(&sk).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.state.len(), 4);
            assert!((a.state.inner(&b.state).unwrap().re - 1.0).abs() < 1e-12);
            let v = coin_verify(&vk, &a.state, &mut rng).unwrap();
            assert!(v.accepted);
            assert!((v.accept_probability - 1.0).abs() < 1e-12);
            assert!(v.post_state.distance(&a.state).unwrap() < 1e-9);
            let again = coin_verify(&vk, &v.post_state, &mut rng).unwrap();
            assert!(again.post_state.distance(&v.post_state).unwrap() < 1e-9);
        }
    }

    #[test]
    fn flipped_signature_loses_its_branch() {
        let mut rng = lab_rng(2);
        let (vk, sk) = coin_setup(CoinVariant::Eqsup, small(), &mut rng).unwrap();
        let coin = gen_banknote(&sk).unwrap();
        let victim = coin.state.branches().next().unwrap().0.clone();
        let tampered = coin
            .state
            .map_labels(|l| {
                if *l == victim {
                    let mut sig = l.parts()[2].to_vec();
                    sig[0] ^= 1;
                    Label::new(vec![l.parts()[0].clone(), l.parts()[1].clone(), sig.into()])
                } else {
                    l.clone()
                }
            })
            .unwrap();
        let p = Verifier::new(&vk).accept_probability(&tampered).unwrap();
        assert!((p - 0.75).abs() < 1e-12);
    }

    #[test]
    fn classical_forgery_over_zero() {
        let mut rng = lab_rng(3);
        let (vk, sk) = coin_setup(CoinVariant::Eqsup, small(), &mut rng).unwrap();
        let (sub, _, sig) = sk.branch(1).unwrap();
        let label = Label::new(vec![id_label(1), Bytes::from(sub.to_bytes()), sig]);
        let forged = HybridState::product(label, StateVector::basis(4, 0).unwrap());
        let p = Verifier::new(&vk).accept_probability(&forged).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn attack_arity_is_checked() {
        let mut rng = lab_rng(4);
        let (vk, sk) = coin_setup(CoinVariant::Eqsup, small(), &mut rng).unwrap();
        let coin = gen_banknote(&sk).unwrap();
        let r = counterfeit_game(&mut Verifier::new(&vk), &coin, 1, |coins, _| Ok(coins), &mut rng);
        assert_eq!(r, Err(CoinError::Arity { expected: 2, found: 1 }));
        let null = counterfeit_game(&mut Verifier::new(&vk), &coin, 0, |c, r| run_attack(CoinAttack::Null, c, 4, r), &mut rng).unwrap();
        assert!(!null.success);
        let mut r2 = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        let out = run_attack(CoinAttack::ZeroPad, vec![coin.state.clone()], 4, &mut r2).unwrap();
        assert_eq!(out.len(), 2);
    }
}
