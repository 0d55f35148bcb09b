//! Deterministic tree signatures from one-time signatures and a PPRF.
//!
//! Every prefix `a` of a message owns a Lamport keypair derived from
//! `F(K, a)` (the empty prefix uses the root keypair). A signature on an
//! `n`-bit message is the chain of `n` links, link `t` holding both child
//! verification keys of `pref_{t-1}(m)` signed under that prefix's key,
//! followed by the tag `y = F₂(K₂, m)` signed under the leaf key.
//!
//! Signature encoding, with `|vk| = 64·L` and `|σ| = 32·L`:
//!
//! ```text
//! (pl⁰[|vk|] ‖ pl¹[|vk|] ‖ sigpl[|σ|]) × n ‖ y[λ/8] ‖ isig[|σ|]
//! ```

use bytes::Bytes;
use rand::RngCore;
use thiserror::Error;

use crate::hilbert::{HilbertError, HybridState, Label};
use crate::primitives::ots::verify_raw;
use crate::primitives::{OtsKeypair, OtsVerifyKey, PprfKey, PrimitiveError, Prf};
use crate::rng::LabRng;

/// Longest message: the prefix encoding needs `8 + n ≤ 64` input bits.
pub const MAX_MESSAGE_BITS: usize = 56;
/// Superposition queries are only simulated for messages this short.
pub const BZ_MAX_MESSAGE_BITS: usize = 4;
/// and digests this short.
pub const BZ_MAX_DIGEST_BITS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetsigError {
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("message {value:#x} is wider than {bits} bits")]
    MessageOutOfRange { value: u64, bits: usize },
    #[error("signing oracle budget of {0} queries exhausted")]
    QueryBudget(usize),
    #[error("query register layout is wrong: {0}")]
    QueryShape(String),
}

pub type Result<T> = std::result::Result<T, DetsigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeParams {
    /// Message bits.
    pub n: usize,
    /// Tag bits, a multiple of 8.
    pub lambda: usize,
    /// One-time signature digest bits.
    pub digest_bits: usize,
}

impl TreeParams {
    pub fn new(n: usize, lambda: usize, digest_bits: usize) -> Result<Self> {
        if n == 0 || n > MAX_MESSAGE_BITS {
            return Err(DetsigError::InvalidParameters(format!("n = {n} not in 1..={MAX_MESSAGE_BITS}")));
        }
        if lambda == 0 || lambda % 8 != 0 {
            return Err(DetsigError::InvalidParameters(format!("lambda = {lambda} is not a multiple of 8")));
        }
        if digest_bits == 0 || digest_bits > 256 {
            return Err(DetsigError::InvalidParameters(format!("digest width {digest_bits} not in 1..=256")));
        }
        Ok(Self { n, lambda, digest_bits })
    }

    pub fn vk_len(&self) -> usize {
        64 * self.digest_bits
    }

    pub fn ots_sig_len(&self) -> usize {
        32 * self.digest_bits
    }

    fn link_len(&self) -> usize {
        2 * self.vk_len() + self.ots_sig_len()
    }

    pub fn signature_len(&self) -> usize {
        self.n * self.link_len() + self.lambda / 8 + self.ots_sig_len()
    }

    fn check_message(&self, m: u64) -> Result<()> {
        if m >> self.n != 0 {
            return Err(DetsigError::MessageOutOfRange { value: m, bits: self.n });
        }
        Ok(())
    }

    /// `bit_t(m)` for `t ∈ 1..=n`, MSB-first.
    pub fn bit(&self, m: u64, t: usize) -> usize {
        ((m >> (self.n - t)) & 1) as usize
    }

    /// `pref_t(m)`, as a `t`-bit integer.
    pub fn prefix(&self, m: u64, t: usize) -> u64 {
        if t == 0 {
            0
        } else {
            m >> (self.n - t)
        }
    }

    /// PPRF input for prefix `a` of length `len`: the length byte, then `a`
    /// left-aligned in `n` bits.
    pub fn prefix_input(&self, a: u64, len: usize) -> u64 {
        ((len as u64) << self.n) | if len == 0 { 0 } else { a << (self.n - len) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSigVerifyKey {
    params: TreeParams,
    root: OtsVerifyKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSigSecretKey {
    params: TreeParams,
    root: OtsKeypair,
    k: PprfKey,
    k2: PprfKey,
}

pub fn setup(params: TreeParams, rng: &mut impl RngCore) -> Result<(TreeSigVerifyKey, TreeSigSecretKey)> {
    let root = OtsKeypair::generate(params.digest_bits, rng)?;
    let k = PprfKey::generate(8 + params.n, 256, rng)?;
    let k2 = PprfKey::generate(params.n, params.lambda, rng)?;
    let vk = TreeSigVerifyKey { params, root: root.vk.clone() };
    Ok((vk, TreeSigSecretKey { params, root, k, k2 }))
}

impl TreeSigVerifyKey {
    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn root(&self) -> &OtsVerifyKey {
        &self.root
    }

    pub fn to_bytes(&self) -> &[u8] {
        self.root.as_bytes()
    }

    pub fn verify(&self, m: u64, signature: &[u8]) -> bool {
        verify(self, m, signature)
    }
}

impl TreeSigSecretKey {
    pub fn params(&self) -> TreeParams {
        self.params
    }

    pub fn prefix_key(&self) -> &PprfKey {
        &self.k
    }

    pub fn tag_key(&self) -> &PprfKey {
        &self.k2
    }

    /// `(vk_a, sk_a)` for the prefix `a` of length `len`.
    pub fn keypair_at(&self, a: u64, len: usize) -> Result<OtsKeypair> {
        if len == 0 {
            return Ok(self.root.clone());
        }
        let seed: [u8; 32] = self.k.eval_array(self.params.prefix_input(a, len))?;
        Ok(OtsKeypair::from_seed(&seed, self.params.digest_bits)?)
    }

    pub fn sign(&self, m: u64) -> Result<TreeSignature> {
        sign(self, m)
    }
}

pub fn sign(sk: &TreeSigSecretKey, m: u64) -> Result<TreeSignature> {
    let p = sk.params;
    p.check_message(m)?;
    let mut out = Vec::with_capacity(p.signature_len());
    let mut parent = sk.root.clone();
    for t in 1..=p.n {
        let a = p.prefix(m, t - 1);
        let left = sk.keypair_at(a << 1, t)?;
        let right = sk.keypair_at((a << 1) | 1, t)?;
        let start = out.len();
        out.extend_from_slice(left.vk.as_bytes());
        out.extend_from_slice(right.vk.as_bytes());
        let payload = out[start..].to_vec();
        parent.sk.sign_into(&payload, &mut out);
        parent = if p.bit(m, t) == 0 { left } else { right };
    }
    let y = sk.k2.eval(m)?;
    out.extend_from_slice(&y);
    parent.sk.sign_into(&y, &mut out);
    Ok(TreeSignature { params: p, bytes: Bytes::from(out) })
}

pub fn verify(vk: &TreeSigVerifyKey, m: u64, signature: &[u8]) -> bool {
    let p = vk.params;
    if p.check_message(m).is_err() || signature.len() != p.signature_len() {
        return false;
    }
    let (vkl, sl, ll) = (p.vk_len(), p.ots_sig_len(), p.link_len());
    let mut key: &[u8] = vk.root.as_bytes();
    for t in 1..=p.n {
        let link = &signature[(t - 1) * ll..t * ll];
        let (payload, sigpl) = link.split_at(2 * vkl);
        if !verify_raw(key, payload, sigpl) {
            return false;
        }
        let b = p.bit(m, t);
        key = &payload[b * vkl..(b + 1) * vkl];
    }
    let tail = &signature[p.n * ll..];
    let (y, isig) = tail.split_at(p.lambda / 8);
    debug_assert_eq!(isig.len(), sl);
    verify_raw(key, y, isig)
}

/// Parsed view of an encoded signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSignature {
    params: TreeParams,
    bytes: Bytes,
}

/// One chain link: both child keys and the parent's signature over them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link<'a> {
    pub pl0: &'a [u8],
    pub pl1: &'a [u8],
    pub sigpl: &'a [u8],
}

impl TreeSignature {
    pub fn from_bytes(params: TreeParams, bytes: impl Into<Bytes>) -> Option<Self> {
        let bytes = bytes.into();
        (bytes.len() == params.signature_len()).then_some(Self { params, bytes })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_bytes(&self) -> Bytes {
        self.bytes.clone()
    }

    pub fn link_count(&self) -> usize {
        self.params.n
    }

    /// Link `t ∈ 1..=n`.
    pub fn link(&self, t: usize) -> Link<'_> {
        let p = self.params;
        let start = (t - 1) * p.link_len();
        let link = &self.bytes[start..start + p.link_len()];
        let (keys, sigpl) = link.split_at(2 * p.vk_len());
        let (pl0, pl1) = keys.split_at(p.vk_len());
        Link { pl0, pl1, sigpl }
    }

    pub fn tag(&self) -> &[u8] {
        let start = self.params.n * self.params.link_len();
        &self.bytes[start..start + self.params.lambda / 8]
    }

    pub fn leaf_signature(&self) -> &[u8] {
        &self.bytes[self.bytes.len() - self.params.ots_sig_len()..]
    }
}

/// Quantum signing oracle with a query budget.
///
/// Queries act on a [`HybridState`] whose label tuple contains the message
/// (big-endian, part `msg_part`) and a response register of exactly
/// `signature_len` bytes (part `out_part`): `|m⟩|w⟩ ↦ |m⟩|w ⊕ Sign(sk, m)⟩`.
pub struct SigningOracle<'a> {
    sk: &'a TreeSigSecretKey,
    budget: usize,
    used: usize,
}

impl<'a> SigningOracle<'a> {
    pub fn new(sk: &'a TreeSigSecretKey, budget: usize) -> Self {
        Self { sk, budget, used: 0 }
    }

    pub fn params(&self) -> TreeParams {
        self.sk.params
    }

    pub fn queries_used(&self) -> usize {
        self.used
    }

    fn spend(&mut self) -> Result<()> {
        if self.used >= self.budget {
            return Err(DetsigError::QueryBudget(self.budget));
        }
        self.used += 1;
        Ok(())
    }

    pub fn query(&mut self, state: &HybridState, msg_part: usize, out_part: usize) -> Result<HybridState> {
        let len = self.sk.params.signature_len();
        // Sign every message once before touching the state so errors
        // leave the budget untouched.
        let mut table = std::collections::BTreeMap::new();
        for (label, _) in state.branches() {
            let m = label
                .int(msg_part)
                .ok_or_else(|| DetsigError::QueryShape(format!("part {msg_part} is not a message")))?;
            let w = label.parts().get(out_part).ok_or_else(|| DetsigError::QueryShape(format!("no part {out_part}")))?;
            if w.len() != len {
                return Err(DetsigError::QueryShape(format!("response register is {} bytes, not {len}", w.len())));
            }
            if let std::collections::btree_map::Entry::Vacant(e) = table.entry(m) {
                e.insert(self.sk.sign(m)?);
            }
        }
        self.spend()?;
        Ok(state.map_labels(|label| {
            let m = label.int(msg_part).expect("checked above");
            let sig = table[&m].as_bytes();
            let mut parts = label.parts().to_vec();
            parts[out_part] = parts[out_part].iter().zip(sig).map(|(a, b)| a ^ b).collect::<Vec<u8>>().into();
            Label::new(parts)
        })?)
    }

    /// A classical query: the basis state `|m⟩|0⟩`, answered and read out.
    pub fn sign_classical(&mut self, m: u64) -> Result<TreeSignature> {
        self.spend()?;
        self.sk.sign(m)
    }
}

/// Plus-one game: the adversary makes at most `k` oracle queries and wins
/// iff it returns `k + 1` pairs with distinct messages that all verify.
pub fn bz_game<A>(params: TreeParams, k: usize, adversary: A, rng: &mut LabRng) -> Result<bool>
where
    A: FnOnce(&TreeSigVerifyKey, &mut SigningOracle<'_>, &mut LabRng) -> Vec<(u64, Vec<u8>)>,
{
    bz_game_with_budget(params, k, k, adversary, rng)
}

/// [`bz_game`] with an oracle budget that may differ from `k`, for
/// checking the harness itself.
pub fn bz_game_with_budget<A>(
    params: TreeParams,
    k: usize,
    budget: usize,
    adversary: A,
    rng: &mut LabRng,
) -> Result<bool>
where
    A: FnOnce(&TreeSigVerifyKey, &mut SigningOracle<'_>, &mut LabRng) -> Vec<(u64, Vec<u8>)>,
{
    if params.n > BZ_MAX_MESSAGE_BITS || params.digest_bits > BZ_MAX_DIGEST_BITS {
        return Err(DetsigError::InvalidParameters(format!(
            "superposition queries need n ≤ {BZ_MAX_MESSAGE_BITS} and L ≤ {BZ_MAX_DIGEST_BITS}"
        )));
    }
    let (vk, sk) = setup(params, rng)?;
    let mut oracle = SigningOracle::new(&sk, budget);
    let pairs = adversary(&vk, &mut oracle, rng);
    if pairs.len() != k + 1 {
        return Ok(false);
    }
    let mut seen = std::collections::BTreeSet::new();
    if !pairs.iter().all(|(m, _)| seen.insert(*m)) {
        return Ok(false);
    }
    Ok(pairs.iter().all(|(m, sig)| vk.verify(*m, sig)))
}
