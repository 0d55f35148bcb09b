//! Single-key to collusion-resistant SDE wiring, the SDE to UE role swap,
//! and game harnesses over toy quantum decryptors.
//!
//! The functional encryption and single-key SDE schemes here are mocks:
//! they are correct, not hiding. The re-encryption circuit and all of the
//! wiring around it are the real logic.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use bytes::Bytes;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::hilbert::{
    mixture_povm, projective_implementation, HilbertError, RegisterLayout, StateVector, MAX_STATE_QUBITS, NORM_TOL,
};
use crate::minischeme::{self, MiniError, Subspace};
use crate::primitives::hash::{expand, tagged, TAG_EXPAND};
use crate::primitives::{PprfKey, PrimitiveError, Prf};
use crate::rng::{random_bytes, LabRng};

/// Ambient bits of the subspace note inside each single-key secret key.
pub const NOTE_BITS: usize = 4;
pub const TAG_LEN: usize = 16;
pub const MSG_LEN: usize = 8;
pub const MAX_MSG_BITS: usize = 16;
pub const MAX_GAME_Q: usize = 3;
pub const MAX_DECRYPTOR_QUBITS: usize = 6;
/// Decryptor outcome standing for a failed decryption.
pub const BOT: u64 = u64::MAX;

const PRF_INPUT_BITS: usize = 64;
const PRF_OUTPUT_BITS: usize = 256;
const NONCE_LEN: usize = 16;
const MAC_LEN: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Mini(#[from] MiniError),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("message {m} does not fit in {bits} bits")]
    MessageOutOfRange { m: u64, bits: usize },
    #[error("adversary returned {found} {what}, expected {expected}")]
    Arity { what: &'static str, expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, SdeError>;

fn check_msg(m: u64, bits: usize) -> Result<()> {
    if bits < 64 && m >> bits != 0 {
        return Err(SdeError::MessageOutOfRange { m, bits });
    }
    Ok(())
}

fn check_msg_bits(bits: usize) -> Result<()> {
    if bits == 0 || bits > MAX_MSG_BITS {
        return Err(SdeError::InvalidParameters(format!("message bits {bits} not in 1..={MAX_MSG_BITS}")));
    }
    Ok(())
}

fn xor_into(dst: &mut [u8], pad: &[u8]) {
    dst.iter_mut().zip(pad).for_each(|(d, p)| *d ^= p);
}

// ---------------------------------------------------------------------------
// Mock single-key SDE

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OnePk {
    tau: [u8; TAG_LEN],
    token: [u8; 16],
    sn: Bytes,
}

impl fmt::Debug for OnePk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OnePk(tau={:02x?})", &self.tau[..4])
    }
}

impl OnePk {
    pub fn tau(&self) -> &[u8; TAG_LEN] {
        &self.tau
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(pk_len());
        out.extend_from_slice(&self.tau);
        out.extend_from_slice(&self.token);
        out.extend_from_slice(&self.sn);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != pk_len() {
            return Err(SdeError::Malformed(format!("public key of {} bytes", bytes.len())));
        }
        Ok(Self {
            tau: bytes[..TAG_LEN].try_into().expect("length checked"),
            token: bytes[TAG_LEN..TAG_LEN + 16].try_into().expect("length checked"),
            sn: Bytes::copy_from_slice(&bytes[TAG_LEN + 16..]),
        })
    }

    fn header(&self) -> [u8; 8] {
        tagged(TAG_EXPAND, &[b"one-header", &self.token])[..8].try_into().expect("8 bytes")
    }
}

/// Quantum part (subspace note) plus the classical token.
#[derive(Clone, Debug, PartialEq)]
pub struct OneSk {
    pub subspace: Subspace,
    pub note: StateVector,
    token: [u8; 16],
}

/// Serialized public key width `ℓ_pk` in bytes.
pub fn pk_len() -> usize {
    TAG_LEN + 16 + 1 + NOTE_BITS / 2 * NOTE_BITS.div_ceil(8)
}

/// Serialized ciphertext width `ℓ_ct` in bytes.
pub fn one_ct_len() -> usize {
    8 + NONCE_LEN + MSG_LEN
}

/// Deterministic key generation from 32 bytes of randomness.
pub fn one_keygen(r: &[u8; 32]) -> Result<(OnePk, OneSk)> {
    let seed = tagged(TAG_EXPAND, &[b"one-keygen", r]);
    let stream = expand(&seed, TAG_LEN + 16 + 32);
    let tau: [u8; TAG_LEN] = stream[..TAG_LEN].try_into().expect("length");
    let token: [u8; 16] = stream[TAG_LEN..TAG_LEN + 16].try_into().expect("length");
    let note = minischeme::mini_gen(NOTE_BITS, &stream[TAG_LEN + 16..])?;
    let pk = OnePk { tau, token, sn: Bytes::from(note.subspace.to_bytes()) };
    Ok((pk, OneSk { subspace: note.subspace, note: note.note, token }))
}

pub fn one_enc(pk: &OnePk, m: u64, rho: &[u8]) -> Vec<u8> {
    let nonce = &rho[..NONCE_LEN];
    let mut body = m.to_be_bytes();
    xor_into(&mut body, &expand(&tagged(TAG_EXPAND, &[b"one-enc", &pk.token, nonce]), MSG_LEN));
    let mut out = Vec::with_capacity(one_ct_len());
    out.extend_from_slice(&pk.header());
    out.extend_from_slice(nonce);
    out.extend_from_slice(&body);
    out
}

/// `None` stands for ⊥.
pub fn one_dec(sk: &OneSk, ct: &[u8]) -> Option<u64> {
    if ct.len() != one_ct_len() {
        return None;
    }
    let header: [u8; 8] = tagged(TAG_EXPAND, &[b"one-header", &sk.token])[..8].try_into().ok()?;
    if ct[..8] != header {
        return None;
    }
    let nonce = &ct[8..8 + NONCE_LEN];
    let mut body: [u8; MSG_LEN] = ct[8 + NONCE_LEN..].try_into().ok()?;
    xor_into(&mut body, &expand(&tagged(TAG_EXPAND, &[b"one-enc", &sk.token, nonce]), MSG_LEN));
    Some(u64::from_be_bytes(body))
}

// ---------------------------------------------------------------------------
// Re-encryption circuit

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReInput {
    pub m: u64,
    pub k: PprfKey,
    pub mode: u8,
    pub pk_prime: Vec<u8>,
    pub ct_star: Vec<u8>,
}

const PPRF_KEY_LEN: usize = 40;

impl ReInput {
    /// `m ‖ K ‖ 0 ‖ 0^{ℓ_pk} ‖ 0^{ℓ_ct}`.
    pub fn honest(m: u64, k: PprfKey) -> Self {
        Self { m, k, mode: 0, pk_prime: vec![0; pk_len()], ct_star: vec![0; one_ct_len()] }
    }

    pub fn len() -> usize {
        MSG_LEN + PPRF_KEY_LEN + 1 + pk_len() + one_ct_len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::len());
        out.extend_from_slice(&self.m.to_be_bytes());
        out.extend_from_slice(&self.k.to_bytes());
        out.push(self.mode);
        out.extend_from_slice(&self.pk_prime);
        out.extend_from_slice(&self.ct_star);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::len() {
            return Err(SdeError::Malformed(format!("circuit input of {} bytes", bytes.len())));
        }
        let (m, rest) = bytes.split_at(MSG_LEN);
        let (k, rest) = rest.split_at(PPRF_KEY_LEN);
        let (mode, rest) = rest.split_at(1);
        let (pk_prime, ct_star) = rest.split_at(pk_len());
        let k = PprfKey::from_bytes(k)?;
        if k.input_bits() != PRF_INPUT_BITS || k.output_bits() != PRF_OUTPUT_BITS {
            return Err(SdeError::Malformed("PRF key shape".into()));
        }
        Ok(Self {
            m: u64::from_be_bytes(m.try_into().expect("length")),
            k,
            mode: mode[0],
            pk_prime: pk_prime.to_vec(),
            ct_star: ct_star.to_vec(),
        })
    }
}

/// `F_K(one_pk)`: the PRF is evaluated on the first 8 bytes of
/// SHA-256(one_pk).
pub fn prf_on_pk(k: &PprfKey, pk: &OnePk) -> Result<Vec<u8>> {
    let h = Sha256::digest(pk.to_bytes());
    let x = u64::from_be_bytes(h[..8].try_into().expect("8 bytes"));
    Ok(k.eval(x)?)
}

/// `RE[one_pk]` on a serialized input.
pub fn re_eval(one_pk: &OnePk, input: &[u8]) -> Result<Vec<u8>> {
    let x = ReInput::from_bytes(input)?;
    let rho = prf_on_pk(&x.k, one_pk)?;
    let tau_prime = &x.pk_prime[..TAG_LEN];
    let cmp = one_pk.tau[..].cmp(tau_prime);
    Ok(match (x.mode, cmp) {
        (0, _) | (1, Ordering::Greater) | (2, Ordering::Greater) => one_enc(one_pk, x.m, &rho),
        (1, _) | (2, Ordering::Less) => one_enc(one_pk, 0, &rho),
        (2, Ordering::Equal) => x.ct_star,
        (mode, _) => return Err(SdeError::Malformed(format!("mode {mode}"))),
    })
}

// ---------------------------------------------------------------------------
// Mock functional encryption

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FePublicKey {
    seal: [u8; 32],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeMasterKey {
    seal: [u8; 32],
}

/// Function key for `RE[one_pk]`. It carries its own descriptor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeFunctionKey {
    pub function: OnePk,
    seal: [u8; 32],
}

pub fn fe_setup(rng: &mut impl RngCore) -> (FePublicKey, FeMasterKey) {
    let seal = random_bytes::<32>(rng);
    (FePublicKey { seal }, FeMasterKey { seal })
}

pub fn fe_kg(msk: &FeMasterKey, function: OnePk) -> FeFunctionKey {
    FeFunctionKey { function, seal: msk.seal }
}

fn seal_pad(seal: &[u8; 32], nonce: &[u8], len: usize) -> Vec<u8> {
    expand(&tagged(TAG_EXPAND, &[b"fe-seal", seal, nonce]), len)
}

fn seal_mac(seal: &[u8; 32], nonce: &[u8], body: &[u8]) -> [u8; 32] {
    tagged(TAG_EXPAND, &[b"fe-mac", seal, nonce, body])
}

pub fn fe_enc(pk: &FePublicKey, x: &[u8], nonce: &[u8; NONCE_LEN]) -> Vec<u8> {
    let mut body = x.to_vec();
    xor_into(&mut body, &seal_pad(&pk.seal, nonce, x.len()));
    let mut out = Vec::with_capacity(NONCE_LEN + body.len() + MAC_LEN);
    out.extend_from_slice(nonce);
    out.extend_from_slice(&body);
    out.extend_from_slice(&seal_mac(&pk.seal, nonce, &body));
    out
}

/// Unseal and evaluate the registered function; `None` on any failure.
pub fn fe_dec(fsk: &FeFunctionKey, ct: &[u8]) -> Option<Vec<u8>> {
    if ct.len() < NONCE_LEN + MAC_LEN {
        return None;
    }
    let (nonce, rest) = ct.split_at(NONCE_LEN);
    let (body, mac) = rest.split_at(rest.len() - MAC_LEN);
    if seal_mac(&fsk.seal, nonce, body)[..] != *mac {
        return None;
    }
    let mut x = body.to_vec();
    xor_into(&mut x, &seal_pad(&fsk.seal, nonce, body.len()));
    re_eval(&fsk.function, &x).ok()
}

// ---------------------------------------------------------------------------
// Collusion-resistant SDE

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdePublicKey {
    fe: FePublicKey,
    msg_bits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdeMasterKey {
    fe: FeMasterKey,
    msg_bits: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdeSecretKey {
    pub one: OneSk,
    pub fsk: FeFunctionKey,
}

impl SdeSecretKey {
    pub fn tau(&self) -> &[u8; TAG_LEN] {
        self.fsk.function.tau()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SdeCiphertext(pub Bytes);

impl SdePublicKey {
    pub fn msg_bits(&self) -> usize {
        self.msg_bits
    }
}

impl SdeMasterKey {
    pub fn msg_bits(&self) -> usize {
        self.msg_bits
    }
}

pub fn sde_ct_len() -> usize {
    NONCE_LEN + ReInput::len() + MAC_LEN
}

pub fn sde_setup(msg_bits: usize, rng: &mut impl RngCore) -> Result<(SdePublicKey, SdeMasterKey)> {
    check_msg_bits(msg_bits)?;
    let (pk, msk) = fe_setup(rng);
    Ok((SdePublicKey { fe: pk, msg_bits }, SdeMasterKey { fe: msk, msg_bits }))
}

/// Key generation with explicit randomness; the output is a fixed function
/// of `(msk, r)`.
pub fn sde_kg(msk: &SdeMasterKey, r: &[u8; 32]) -> Result<SdeSecretKey> {
    let (one_pk, one) = one_keygen(r)?;
    Ok(SdeSecretKey { one, fsk: fe_kg(&msk.fe, one_pk) })
}

pub fn sde_kg_random(msk: &SdeMasterKey, rng: &mut impl RngCore) -> Result<SdeSecretKey> {
    sde_kg(msk, &random_bytes::<32>(rng))
}

pub fn sde_enc_with(pk: &SdePublicKey, m: u64, k: PprfKey, nonce: &[u8; NONCE_LEN]) -> Result<SdeCiphertext> {
    check_msg(m, pk.msg_bits)?;
    let x = ReInput::honest(m, k).to_bytes();
    Ok(SdeCiphertext(Bytes::from(fe_enc(&pk.fe, &x, nonce))))
}

pub fn sde_enc(pk: &SdePublicKey, m: u64, rng: &mut impl RngCore) -> Result<SdeCiphertext> {
    let k = PprfKey::generate(PRF_INPUT_BITS, PRF_OUTPUT_BITS, rng)?;
    sde_enc_with(pk, m, k, &random_bytes::<NONCE_LEN>(rng))
}

/// `None` stands for ⊥.
pub fn sde_dec(sk: &SdeSecretKey, ct: &SdeCiphertext) -> Option<u64> {
    let one_ct = fe_dec(&sk.fsk, &ct.0)?;
    one_dec(&sk.one, &one_ct)
}

// ---------------------------------------------------------------------------
// Unclonable encryption by role swap

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UeEncKey {
    pub msk: SdeMasterKey,
    pub s: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UeDecKey {
    pub ct: SdeCiphertext,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UeCiphertext {
    pub sk: SdeSecretKey,
    pub mu: u64,
}

fn random_msg(bits: usize, rng: &mut impl Rng) -> u64 {
    rng.random::<u64>() & ((1u64 << bits) - 1)
}

pub fn ue_kg(msg_bits: usize, rng: &mut impl Rng) -> Result<(UeEncKey, UeDecKey)> {
    let (pk, msk) = sde_setup(msg_bits, rng)?;
    let s = random_msg(msg_bits, rng);
    let ct = sde_enc(&pk, s, rng)?;
    Ok((UeEncKey { msk, s }, UeDecKey { ct }))
}

/// Encryption with explicit key-generation randomness.
pub fn ue_enc(ek: &UeEncKey, m: u64, r: &[u8; 32]) -> Result<UeCiphertext> {
    check_msg(m, ek.msk.msg_bits)?;
    Ok(UeCiphertext { sk: sde_kg(&ek.msk, r)?, mu: m ^ ek.s })
}

pub fn ue_enc_random(ek: &UeEncKey, m: u64, rng: &mut impl RngCore) -> Result<UeCiphertext> {
    ue_enc(ek, m, &random_bytes::<32>(rng))
}

pub fn ue_dec(dk: &UeDecKey, ct: &UeCiphertext) -> Option<u64> {
    Some(ct.mu ^ sde_dec(&ct.sk, &dk.ct)?)
}

/// UE variant whose encryption and decryption keys are the same pad `s`
/// over the serialized inner decryption key.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedUeCiphertext {
    pub ct: UeCiphertext,
    pub masked_dk: Bytes,
}

pub fn ue_ekdk_kg(rng: &mut impl RngCore) -> (Bytes, Bytes) {
    let mut s = vec![0u8; sde_ct_len()];
    rng.fill_bytes(&mut s);
    let s = Bytes::from(s);
    (s.clone(), s)
}

pub fn ue_ekdk_enc(ek: &[u8], msg_bits: usize, m: u64, rng: &mut impl Rng) -> Result<PaddedUeCiphertext> {
    if ek.len() != sde_ct_len() {
        return Err(SdeError::Malformed(format!("key of {} bytes", ek.len())));
    }
    let (inner_ek, inner_dk) = ue_kg(msg_bits, rng)?;
    let ct = ue_enc_random(&inner_ek, m, rng)?;
    let mut masked = inner_dk.ct.0.to_vec();
    xor_into(&mut masked, ek);
    Ok(PaddedUeCiphertext { ct, masked_dk: Bytes::from(masked) })
}

pub fn ue_ekdk_dec(dk: &[u8], ct: &PaddedUeCiphertext) -> Option<u64> {
    if dk.len() != ct.masked_dk.len() {
        return None;
    }
    let mut inner = ct.masked_dk.to_vec();
    xor_into(&mut inner, dk);
    ue_dec(&UeDecKey { ct: SdeCiphertext(Bytes::from(inner)) }, &ct.ct)
}

// ---------------------------------------------------------------------------
// Quantum decryptors and games

/// Outcome projectors of a decryptor on one input. Every projector acts on
/// the decryptor's register and together they sum to the identity.
pub type Outcomes = Vec<(u64, DMatrix<Complex64>)>;

pub type Program = Arc<dyn Fn(&[u8]) -> Result<Outcomes> + Send + Sync>;

/// A register width together with the measurement it performs on each
/// input string.
#[derive(Clone)]
pub struct Decryptor {
    pub qubits: usize,
    pub program: Program,
}

impl fmt::Debug for Decryptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Decryptor").field("qubits", &self.qubits).finish_non_exhaustive()
    }
}

impl Decryptor {
    /// One idle qubit and a deterministic classical answer.
    pub fn classical(f: impl Fn(&[u8]) -> Option<u64> + Send + Sync + 'static) -> Self {
        Self {
            qubits: 1,
            program: Arc::new(move |input| Ok(vec![(f(input).unwrap_or(BOT), DMatrix::identity(2, 2))])),
        }
    }

    /// Reads basis state `j` of its register as `answers[j]`.
    pub fn basis_reader(qubits: usize, answers: Vec<u64>) -> Result<Self> {
        if answers.len() != 1 << qubits {
            return Err(SdeError::InvalidParameters("one answer per basis state".into()));
        }
        let d = 1usize << qubits;
        let outcomes: Outcomes = answers
            .into_iter()
            .enumerate()
            .map(|(j, m)| {
                let mut p = DMatrix::zeros(d, d);
                p[(j, j)] = Complex64::new(1.0, 0.0);
                (m, p)
            })
            .collect();
        Ok(Self { qubits, program: Arc::new(move |_| Ok(outcomes.clone())) })
    }

    fn projector_for(&self, input: &[u8], m: u64) -> Result<DMatrix<Complex64>> {
        let d = 1usize << self.qubits;
        let mut acc = DMatrix::zeros(d, d);
        for (answer, p) in (self.program)(input)? {
            if p.nrows() != d || p.ncols() != d {
                return Err(SdeError::Hilbert(HilbertError::DimensionMismatch { expected: d, found: p.nrows() }));
            }
            if answer == m {
                acc += p;
            }
        }
        Ok(acc)
    }
}

/// What the adversary hands back: a joint state over one register per
/// decryptor, and the message pairs for the distinguishing game.
#[derive(Clone, Debug)]
pub struct AdversaryOutput {
    pub state: StateVector,
    pub decryptors: Vec<Decryptor>,
    pub message_pairs: Vec<(u64, u64)>,
}

impl AdversaryOutput {
    /// Product of per-decryptor states.
    pub fn product(parts: Vec<(StateVector, Decryptor)>, message_pairs: Vec<(u64, u64)>) -> Result<Self> {
        let mut state = StateVector::unit();
        let mut decryptors = Vec::with_capacity(parts.len());
        for (s, d) in parts {
            if s.num_qubits() != d.qubits {
                return Err(SdeError::InvalidParameters("state width differs from decryptor register".into()));
            }
            state = state.tensor(&s)?;
            decryptors.push(d);
        }
        Ok(Self { state, decryptors, message_pairs })
    }
}

/// What the adversary sees before answering.
#[derive(Clone, Debug)]
pub enum AdversaryView {
    Keys { pk: SdePublicKey, keys: Vec<SdeSecretKey> },
    Ciphertexts { msg_bits: usize, cts: Vec<UeCiphertext> },
}

pub type Adversary<'a> = dyn FnMut(&AdversaryView, &mut LabRng) -> Result<AdversaryOutput> + 'a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Game {
    StrongAntiPiracy,
    StrongSearch,
    IdenticalChallenge,
    MultiChallengeUe,
    MultiCopyUe,
}

impl Game {
    pub const ALL: [Game; 5] =
        [Game::StrongAntiPiracy, Game::StrongSearch, Game::IdenticalChallenge, Game::MultiChallengeUe, Game::MultiCopyUe];

    pub fn name(self) -> &'static str {
        match self {
            Game::StrongAntiPiracy => "strong-anti-piracy",
            Game::StrongSearch => "strong-search",
            Game::IdenticalChallenge => "identical-challenge",
            Game::MultiChallengeUe => "multi-challenge-ue",
            Game::MultiCopyUe => "multi-copy-ue",
        }
    }
}

impl std::str::FromStr for Game {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Game::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| format!("unknown game {s}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GameParams {
    pub q: usize,
    pub gamma: f64,
    pub msg_bits: usize,
    /// Encryption randomness samples per message in the decryptor tests.
    pub enc_samples: usize,
}

impl Default for GameParams {
    fn default() -> Self {
        Self { q: 2, gamma: 0.1, msg_bits: 2, enc_samples: 4 }
    }
}

impl GameParams {
    fn check(&self) -> Result<()> {
        if self.q > MAX_GAME_Q {
            return Err(SdeError::InvalidParameters(format!("q = {} above {MAX_GAME_Q}", self.q)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return Err(SdeError::InvalidParameters(format!("gamma {} not in (0, 1/2]", self.gamma)));
        }
        if self.msg_bits == 0 || self.msg_bits > 4 {
            return Err(SdeError::InvalidParameters(format!("message bits {} not in 1..=4", self.msg_bits)));
        }
        if self.enc_samples == 0 {
            return Err(SdeError::InvalidParameters("need at least one encryption sample".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameReport {
    pub game: Game,
    pub q: usize,
    /// Threshold test bits (tested games) or per-party correctness.
    pub party_bits: Vec<bool>,
    pub outputs: Vec<Option<u64>>,
    pub game_bit: bool,
    pub transcript: Vec<String>,
}

struct Transcript(Vec<String>);

impl Transcript {
    fn log(&mut self, step: impl Into<String>) {
        self.0.push(step.into());
    }
}

fn check_output(out: &AdversaryOutput, parties: usize, pairs: bool) -> Result<RegisterLayout> {
    if out.decryptors.len() != parties {
        return Err(SdeError::Arity { what: "decryptors", expected: parties, found: out.decryptors.len() });
    }
    if pairs && out.message_pairs.len() != parties {
        return Err(SdeError::Arity { what: "message pairs", expected: parties, found: out.message_pairs.len() });
    }
    let widths: Vec<usize> = out.decryptors.iter().map(|d| d.qubits).collect();
    if let Some(w) = widths.iter().find(|&&w| w == 0 || w > MAX_DECRYPTOR_QUBITS) {
        return Err(SdeError::InvalidParameters(format!("decryptor register of {w} qubits")));
    }
    let layout = RegisterLayout::new(widths);
    if layout.total_qubits() > MAX_STATE_QUBITS || out.state.num_qubits() != layout.total_qubits() {
        return Err(SdeError::InvalidParameters(format!(
            "joint state of {} qubits for registers totalling {}",
            out.state.num_qubits(),
            layout.total_qubits()
        )));
    }
    if (out.state.norm() - 1.0).abs() > NORM_TOL {
        return Err(SdeError::Hilbert(HilbertError::NotNormalized(out.state.norm())));
    }
    Ok(layout)
}

/// Run `TI_threshold` of the mixture `Σ w · Π^{input}_{m}` on register `reg`.
fn threshold_test(
    d: &Decryptor,
    cases: &[(f64, Vec<u8>, u64)],
    threshold: f64,
    state: &StateVector,
    layout: &RegisterLayout,
    reg: usize,
    rng: &mut LabRng,
) -> Result<(bool, StateVector)> {
    let dist = cases
        .iter()
        .map(|(w, input, m)| Ok((*w, d.projector_for(input, *m)?)))
        .collect::<Result<Vec<_>>>()?;
    let imp = projective_implementation(&mixture_povm(&dist)?);
    Ok(imp.threshold_register(threshold, state, layout, reg, rng)?)
}

/// Run decryptor `reg` on `input` and collapse the joint state.
fn run_decryptor(
    d: &Decryptor,
    input: &[u8],
    state: &StateVector,
    layout: &RegisterLayout,
    reg: usize,
    rng: &mut LabRng,
) -> Result<(u64, StateVector)> {
    let outcomes = (d.program)(input)?;
    let branches = outcomes
        .iter()
        .map(|(m, p)| Ok((*m, state.apply_local(layout, reg, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = branches.iter().map(|(_, b)| b.norm().powi(2)).collect();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(SdeError::InvalidParameters(format!("decryptor outcomes carry total weight {total}")));
    }
    let mut u = rng.random::<f64>() * total;
    let mut pick = weights.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            pick = i;
            break;
        }
        u -= w;
    }
    let (m, branch) = &branches[pick];
    Ok((*m, StateVector::normalized(state.num_qubits(), branch.amplitudes().to_vec())?))
}

pub fn run_game(game: Game, adversary: &mut Adversary<'_>, params: GameParams, rng: &mut LabRng) -> Result<GameReport> {
    params.check()?;
    let q = params.q;
    let parties = q + 1;
    let mut tr = Transcript(Vec::new());
    let messages = 1u64 << params.msg_bits;

    match game {
        Game::StrongAntiPiracy | Game::StrongSearch | Game::IdenticalChallenge => {
            let (pk, msk) = sde_setup(params.msg_bits, rng)?;
            tr.log("setup");
            let keys = (0..q).map(|_| sde_kg_random(&msk, rng)).collect::<Result<Vec<_>>>()?;
            tr.log(format!("issue-keys q={q}"));
            let out = adversary(&AdversaryView::Keys { pk: pk.clone(), keys }, rng)?;
            let layout = check_output(&out, parties, game == Game::StrongAntiPiracy)?;
            tr.log("decryptors");
            let mut state = out.state.clone();
            let mut party_bits = Vec::with_capacity(parties);
            let mut outputs = Vec::with_capacity(parties);

            if game == Game::IdenticalChallenge {
                let m = random_msg(params.msg_bits, rng);
                let ct = sde_enc(&pk, m, rng)?;
                tr.log("challenge");
                for (i, d) in out.decryptors.iter().enumerate() {
                    let (answer, post) = run_decryptor(d, &ct.0, &state, &layout, i, rng)?;
                    state = post;
                    outputs.push((answer != BOT).then_some(answer));
                    party_bits.push(answer == m);
                    tr.log(format!("run {i}"));
                }
            } else {
                for (i, d) in out.decryptors.iter().enumerate() {
                    let (cases, threshold) = if game == Game::StrongAntiPiracy {
                        let (m0, m1) = out.message_pairs[i];
                        check_msg(m0, params.msg_bits)?;
                        check_msg(m1, params.msg_bits)?;
                        let w = 0.5 / params.enc_samples as f64;
                        let mut cases = Vec::new();
                        for m in [m0, m1] {
                            for _ in 0..params.enc_samples {
                                cases.push((w, sde_enc(&pk, m, rng)?.0.to_vec(), m));
                            }
                        }
                        (cases, 0.5 + params.gamma)
                    } else {
                        let w = 1.0 / (messages as f64 * params.enc_samples as f64);
                        let mut cases = Vec::new();
                        for m in 0..messages {
                            for _ in 0..params.enc_samples {
                                cases.push((w, sde_enc(&pk, m, rng)?.0.to_vec(), m));
                            }
                        }
                        (cases, 1.0 / messages as f64 + params.gamma)
                    };
                    let (pass, post) = threshold_test(d, &cases, threshold.min(1.0), &state, &layout, i, rng)?;
                    state = post;
                    party_bits.push(pass);
                    outputs.push(None);
                    tr.log(format!("test {i}"));
                }
            }
            let game_bit = party_bits.iter().all(|&b| b);
            tr.log("verdict");
            Ok(GameReport { game, q, party_bits, outputs, game_bit, transcript: tr.0 })
        }
        Game::MultiChallengeUe | Game::MultiCopyUe => {
            let (ek, dk) = ue_kg(params.msg_bits, rng)?;
            tr.log("keygen");
            tr.log(format!("request q={q}"));
            let m = random_msg(params.msg_bits, rng);
            let cts = if game == Game::MultiChallengeUe {
                (0..q).map(|_| ue_enc_random(&ek, m, rng)).collect::<Result<Vec<_>>>()?
            } else {
                let r = random_bytes::<32>(rng);
                let ct = ue_enc(&ek, m, &r)?;
                vec![ct; q]
            };
            tr.log("ciphertexts");
            let out = adversary(&AdversaryView::Ciphertexts { msg_bits: params.msg_bits, cts }, rng)?;
            let layout = check_output(&out, parties, false)?;
            tr.log("split");
            tr.log("reveal-dk");
            let mut state = out.state.clone();
            let mut party_bits = Vec::with_capacity(parties);
            let mut outputs = Vec::with_capacity(parties);
            for (i, d) in out.decryptors.iter().enumerate() {
                let (answer, post) = run_decryptor(d, &dk.ct.0, &state, &layout, i, rng)?;
                state = post;
                outputs.push((answer != BOT).then_some(answer));
                party_bits.push(answer == m);
                tr.log(format!("output {i}"));
            }
            let game_bit = party_bits.iter().all(|&b| b);
            tr.log("verdict");
            Ok(GameReport { game, q, party_bits, outputs, game_bit, transcript: tr.0 })
        }
    }
}

/// Ready-made adversaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinAdversary {
    /// Embed each received key (or ciphertext) in its own decryptor and add
    /// a guesser as the extra party.
    HonestForwarder,
    /// Hand every party a copy of the first key's decryptor.
    PerfectCopies,
    /// Give every party a uniform guess.
    Junk,
}

impl std::str::FromStr for BuiltinAdversary {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "honest-forwarder" => Ok(Self::HonestForwarder),
            "perfect-copies" => Ok(Self::PerfectCopies),
            "junk" => Ok(Self::Junk),
            other => Err(format!("unknown adversary {other}")),
        }
    }
}

fn key_decryptor(sk: SdeSecretKey) -> Decryptor {
    Decryptor::classical(move |ct| sde_dec(&sk, &SdeCiphertext(Bytes::copy_from_slice(ct))))
}

fn ct_decryptor(ct: UeCiphertext) -> Decryptor {
    Decryptor::classical(move |dk| ue_dec(&UeDecKey { ct: SdeCiphertext(Bytes::copy_from_slice(dk)) }, &ct))
}

fn uniform_guesser(msg_bits: usize) -> Result<(StateVector, Decryptor)> {
    let answers = (0..1u64 << msg_bits).collect();
    Ok((StateVector::plus(msg_bits)?, Decryptor::basis_reader(msg_bits, answers)?))
}

fn idle() -> StateVector {
    StateVector::basis(1, 0).expect("one qubit")
}

impl BuiltinAdversary {
    /// The adversary as a game callback for `parties = q + 1` parties.
    pub fn play(self, view: &AdversaryView, parties: usize) -> Result<AdversaryOutput> {
        let pairs = vec![(0, 1); parties];
        let msg_bits = match view {
            AdversaryView::Keys { pk, .. } => pk.msg_bits,
            AdversaryView::Ciphertexts { msg_bits, .. } => *msg_bits,
        };
        let real: Vec<Decryptor> = match view {
            AdversaryView::Keys { keys, .. } => keys.iter().cloned().map(key_decryptor).collect(),
            AdversaryView::Ciphertexts { cts, .. } => cts.iter().cloned().map(ct_decryptor).collect(),
        };
        let parts = match self {
            BuiltinAdversary::HonestForwarder => {
                let mut parts: Vec<_> = real.into_iter().take(parties - 1).map(|d| (idle(), d)).collect();
                while parts.len() < parties {
                    parts.push(match view {
                        AdversaryView::Keys { .. } => {
                            (StateVector::plus(1)?, Decryptor::basis_reader(1, vec![pairs[0].0, pairs[0].1])?)
                        }
                        AdversaryView::Ciphertexts { .. } => uniform_guesser(msg_bits)?,
                    });
                }
                parts
            }
            BuiltinAdversary::PerfectCopies => {
                let d = real.into_iter().next().ok_or_else(|| {
                    SdeError::InvalidParameters("perfect copies need at least one key or ciphertext".into())
                })?;
                (0..parties).map(|_| (idle(), d.clone())).collect()
            }
            BuiltinAdversary::Junk => (0..parties).map(|_| uniform_guesser(msg_bits)).collect::<Result<_>>()?,
        };
        AdversaryOutput::product(parts, pairs)
    }
}

/// Run `game` against a built-in adversary.
pub fn run_builtin(game: Game, adversary: BuiltinAdversary, params: GameParams, rng: &mut LabRng) -> Result<GameReport> {
    let parties = params.q + 1;
    run_game(game, &mut |view, _| adversary.play(view, parties), params, rng)
}
