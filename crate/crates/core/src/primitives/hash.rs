//! Domain-separated SHA-256.
//!
//! Every derivation hashes a one-byte tag followed by its inputs:
//!
//! | tag    | use                                   |
//! |--------|---------------------------------------|
//! | `0x00` | GGM left child                        |
//! | `0x01` | GGM right child                       |
//! | `0x02` | output expansion, `seed ‖ counter_le` |
//! | `0x03` | one-time signatures (sub-tagged)      |

use sha2::{Digest, Sha256};

pub const TAG_LEFT: u8 = 0x00;
pub const TAG_RIGHT: u8 = 0x01;
pub const TAG_EXPAND: u8 = 0x02;
pub const TAG_OTS: u8 = 0x03;

pub type Digest32 = [u8; 32];

/// `SHA-256(tag ‖ parts[0] ‖ parts[1] ‖ …)`.
pub fn tagged(tag: u8, parts: &[&[u8]]) -> Digest32 {
    let mut h = Sha256::new();
    h.update([tag]);
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}

/// Length-doubling PRG step: child `bit` of `seed`.
pub fn child(seed: &Digest32, bit: bool) -> Digest32 {
    tagged(if bit { TAG_RIGHT } else { TAG_LEFT }, &[seed])
}

/// Stretch `seed` to `len` bytes with counter-mode hashing.
pub fn expand(seed: &Digest32, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len.next_multiple_of(32));
    let mut counter = 0u32;
    while out.len() < len {
        out.extend_from_slice(&tagged(TAG_EXPAND, &[seed, &counter.to_le_bytes()]));
        counter += 1;
    }
    out.truncate(len);
    out
}
