//! Lamport one-time signatures over a truncated message digest.
//!
//! Keys are derived from a 32-byte seed:
//!
//! ```text
//! sk[b][i] = H(0x03 ‖ 0x00 ‖ seed ‖ b ‖ i:u16_le)
//! vk[b][i] = H(0x03 ‖ 0x01 ‖ sk[b][i])
//! digest   = H(0x03 ‖ 0x02 ‖ message), first L bits, MSB-first
//! sig[i]   = sk[digest_i][i]
//! ```
//!
//! `vk` encodes as the `2L` images (`b = 0` row first), `64·L` bytes. A
//! signature encodes as its `L` preimages, `32·L` bytes. `L` is implied by
//! either length.

use rand::RngCore;

use super::hash::{tagged, Digest32, TAG_OTS};
use super::{PrimitiveError, Result};

pub const DEFAULT_DIGEST_BITS: usize = 256;

const SUB_SECRET: u8 = 0x00;
const SUB_IMAGE: u8 = 0x01;
const SUB_DIGEST: u8 = 0x02;

const SHA256_IV: [u32; 8] =
    [0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19];

/// `H(0x03 ‖ 0x01 ‖ preimage)` for a 32-byte preimage. The 34-byte input
/// fits one padded block, so this drives the compression function directly.
fn image(preimage: &[u8]) -> Digest32 {
    if preimage.len() != 32 {
        return tagged(TAG_OTS, &[&[SUB_IMAGE], preimage]);
    }
    let mut block = [0u8; 64];
    block[0] = TAG_OTS;
    block[1] = SUB_IMAGE;
    block[2..34].copy_from_slice(preimage);
    block[34] = 0x80;
    block[56..].copy_from_slice(&(34u64 * 8).to_be_bytes());
    let mut state = SHA256_IV;
    sha2::compress256(&mut state, &[block.into()]);
    let mut out = [0u8; 32];
    for (chunk, word) in out.chunks_exact_mut(4).zip(state) {
        chunk.copy_from_slice(&word.to_be_bytes());
    }
    out
}

fn digest_bit(digest: &Digest32, i: usize) -> usize {
    usize::from((digest[i / 8] >> (7 - i % 8)) & 1)
}

fn message_digest(message: &[u8]) -> Digest32 {
    tagged(TAG_OTS, &[&[SUB_DIGEST], message])
}

fn check_bits(digest_bits: usize) -> Result<()> {
    if digest_bits == 0 || digest_bits > 256 {
        return Err(PrimitiveError::InvalidParameters(format!("digest width {digest_bits} not in 1..=256")));
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq)]
pub struct OtsSecretKey {
    digest_bits: usize,
    /// `preimages[b * L + i]`.
    preimages: Vec<Digest32>,
}

impl std::fmt::Debug for OtsSecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OtsSecretKey").field("digest_bits", &self.digest_bits).finish_non_exhaustive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OtsVerifyKey {
    bytes: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OtsKeypair {
    pub sk: OtsSecretKey,
    pub vk: OtsVerifyKey,
}

impl OtsKeypair {
    pub fn from_seed(seed: &Digest32, digest_bits: usize) -> Result<Self> {
        check_bits(digest_bits)?;
        let mut preimages = Vec::with_capacity(2 * digest_bits);
        let mut vk = Vec::with_capacity(64 * digest_bits);
        for b in 0..2u8 {
            for i in 0..digest_bits as u16 {
                let sk = tagged(TAG_OTS, &[&[SUB_SECRET], seed, &[b], &i.to_le_bytes()]);
                vk.extend_from_slice(&image(&sk));
                preimages.push(sk);
            }
        }
        Ok(Self { sk: OtsSecretKey { digest_bits, preimages }, vk: OtsVerifyKey { bytes: vk } })
    }

    pub fn generate(digest_bits: usize, rng: &mut impl RngCore) -> Result<Self> {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        Self::from_seed(&seed, digest_bits)
    }
}

impl OtsSecretKey {
    pub fn digest_bits(&self) -> usize {
        self.digest_bits
    }

    pub fn signature_len(&self) -> usize {
        32 * self.digest_bits
    }

    /// Append the signature of `message` to `out`.
    pub fn sign_into(&self, message: &[u8], out: &mut Vec<u8>) {
        let digest = message_digest(message);
        for i in 0..self.digest_bits {
            out.extend_from_slice(&self.preimages[digest_bit(&digest, i) * self.digest_bits + i]);
        }
    }

    pub fn sign(&self, message: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.signature_len());
        self.sign_into(message, &mut out);
        out
    }

    /// Recompute the matching verification key.
    pub fn verify_key(&self) -> OtsVerifyKey {
        OtsVerifyKey { bytes: self.preimages.iter().flat_map(|p| image(p)).collect() }
    }
}

impl OtsVerifyKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.is_empty() || bytes.len() % 64 != 0 || bytes.len() > 64 * 256 {
            return Err(PrimitiveError::Malformed(format!("verification key of {} bytes", bytes.len())));
        }
        Ok(Self { bytes: bytes.to_vec() })
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn digest_bits(&self) -> usize {
        self.bytes.len() / 64
    }

    pub fn verify(&self, message: &[u8], signature: &[u8]) -> bool {
        verify_raw(&self.bytes, message, signature)
    }
}

/// Verify against an encoded verification key without copying it.
///
/// Any length mismatch is a rejection.
pub fn verify_raw(vk: &[u8], message: &[u8], signature: &[u8]) -> bool {
    if vk.is_empty() || vk.len() % 64 != 0 {
        return false;
    }
    let bits = vk.len() / 64;
    if bits > 256 || signature.len() != 32 * bits {
        return false;
    }
    let digest = message_digest(message);
    signature.chunks_exact(32).enumerate().all(|(i, pre)| {
        let slot = (digest_bit(&digest, i) * bits + i) * 32;
        image(pre)[..] == vk[slot..slot + 32]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::lab_rng;

    #[test]
    fn single_block_image_matches_hasher() {
        for seed in 0..8u8 {
            let pre = [seed.wrapping_mul(37); 32];
            assert_eq!(image(&pre), tagged(TAG_OTS, &[&[SUB_IMAGE], &pre]));
        }
    }

    #[test]
    fn round_trip_and_determinism() {
        let mut rng = lab_rng(1);
        let kp = OtsKeypair::generate(DEFAULT_DIGEST_BITS, &mut rng).unwrap();
        assert_eq!(kp.vk.as_bytes().len(), 64 * 256);
        assert_eq!(kp.sk.verify_key(), kp.vk);
        let msg = b"one time";
        let sig = kp.sk.sign(msg);
        assert_eq!(sig.len(), 32 * 256);
        assert_eq!(sig, kp.sk.sign(msg));
        assert!(kp.vk.verify(msg, &sig));
        assert!(!kp.vk.verify(b"two time", &sig));
        assert!(!kp.vk.verify(msg, &sig[..sig.len() - 32]));
    }

    #[test]
    fn short_digest_tamper_is_exhaustively_rejected() {
        let kp = OtsKeypair::from_seed(&[9; 32], 16).unwrap();
        let sig = kp.sk.sign(b"m");
        let mut bad = sig.clone();
        for bit in 0..8 * bad.len() {
            bad[bit / 8] ^= 1 << (bit % 8);
            assert!(!kp.vk.verify(b"m", &bad));
            bad[bit / 8] ^= 1 << (bit % 8);
        }
        assert_eq!(bad, sig);
    }

    #[test]
    fn bad_parameters() {
        assert!(OtsKeypair::from_seed(&[0; 32], 0).is_err());
        assert!(OtsKeypair::from_seed(&[0; 32], 257).is_err());
        assert!(OtsVerifyKey::from_bytes(&[0; 63]).is_err());
    }
}
