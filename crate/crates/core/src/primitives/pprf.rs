//! GGM tree PRF with puncturing.
//!
//! Inputs are `ℓ₁`-bit integers read MSB-first: the top bit picks the child
//! of the root. The leaf seed is stretched to `ℓ₂` bits with
//! [`hash::expand`].
//!
//! Encodings (little-endian):
//!
//! * `PprfKey`: `root[32] ‖ ℓ₁:u32 ‖ ℓ₂:u32`
//! * `PuncturedKey`: `ℓ₁:u32 ‖ ℓ₂:u32 ‖ |S|:u32 ‖ S as u64… ‖ count:u32 ‖
//!   (depth:u8 ‖ index:u64 ‖ seed[32])…`, nodes sorted by `(depth, index)`.

use std::collections::BTreeSet;

use rand::RngCore;

use super::hash::{self, Digest32};
use super::{PrimitiveError, Result};

/// Largest supported input width.
pub const MAX_INPUT_BITS: usize = 64;
/// Largest puncture set.
pub const MAX_PUNCTURE: usize = 64;

/// Anything that evaluates like a PPRF key.
pub trait Prf {
    fn input_bits(&self) -> usize;
    fn output_bits(&self) -> usize;
    fn eval(&self, x: u64) -> Result<Vec<u8>>;

    /// Evaluate into a fixed-size array; `N` must equal `output_bits / 8`.
    fn eval_array<const N: usize>(&self, x: u64) -> Result<[u8; N]> {
        self.eval(x)?
            .try_into()
            .map_err(|v: Vec<u8>| PrimitiveError::InvalidParameters(format!("output is {} bytes, not {N}", v.len())))
    }
}

fn check_params(input_bits: usize, output_bits: usize) -> Result<()> {
    if input_bits == 0 || input_bits > MAX_INPUT_BITS {
        return Err(PrimitiveError::InvalidParameters(format!("input width {input_bits} not in 1..=64")));
    }
    if output_bits == 0 || output_bits % 8 != 0 {
        return Err(PrimitiveError::InvalidParameters(format!(
            "output width {output_bits} is not a positive multiple of 8"
        )));
    }
    Ok(())
}

fn check_input(x: u64, bits: usize) -> Result<()> {
    if bits < 64 && x >> bits != 0 {
        return Err(PrimitiveError::InputOutOfRange { value: x, bits });
    }
    Ok(())
}

/// Descend `levels` steps from `seed`, consuming the low `levels` bits of
/// `path` MSB-first.
fn descend(mut seed: Digest32, path: u64, levels: usize) -> Digest32 {
    for i in (0..levels).rev() {
        seed = hash::child(&seed, (path >> i) & 1 == 1);
    }
    seed
}

/// Prefix of `x` consisting of its top `depth` bits.
fn prefix(x: u64, input_bits: usize, depth: usize) -> u64 {
    if depth == 0 {
        0
    } else {
        x >> (input_bits - depth)
    }
}

fn low_bits(x: u64, bits: usize) -> u64 {
    if bits >= 64 {
        x
    } else {
        x & ((1u64 << bits) - 1)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct PprfKey {
    root: Digest32,
    input_bits: usize,
    output_bits: usize,
}

impl std::fmt::Debug for PprfKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PprfKey")
            .field("input_bits", &self.input_bits)
            .field("output_bits", &self.output_bits)
            .finish_non_exhaustive()
    }
}

impl PprfKey {
    pub fn new(root: Digest32, input_bits: usize, output_bits: usize) -> Result<Self> {
        check_params(input_bits, output_bits)?;
        Ok(Self { root, input_bits, output_bits })
    }

    pub fn generate(input_bits: usize, output_bits: usize, rng: &mut impl RngCore) -> Result<Self> {
        let mut root = [0u8; 32];
        rng.fill_bytes(&mut root);
        Self::new(root, input_bits, output_bits)
    }

    pub fn root(&self) -> &Digest32 {
        &self.root
    }

    /// Key for the subset of inputs `x ∉ S`.
    pub fn puncture(&self, set: &[u64]) -> Result<PuncturedKey> {
        if set.is_empty() {
            return Err(PrimitiveError::EmptySet);
        }
        if set.len() > MAX_PUNCTURE {
            return Err(PrimitiveError::InvalidParameters(format!("{} points exceeds {MAX_PUNCTURE}", set.len())));
        }
        let mut points = BTreeSet::new();
        for &x in set {
            check_input(x, self.input_bits)?;
            if !points.insert(x) {
                return Err(PrimitiveError::DuplicatePoint(x));
            }
        }
        // Nodes on some root-to-leaf path of a punctured point.
        let on_path: Vec<BTreeSet<u64>> = (0..=self.input_bits)
            .map(|d| points.iter().map(|&x| prefix(x, self.input_bits, d)).collect())
            .collect();
        let mut nodes = Vec::new();
        for depth in 1..=self.input_bits {
            for &parent in &on_path[depth - 1] {
                let parent_seed = descend(self.root, parent, depth - 1);
                for bit in [0u64, 1] {
                    let index = (parent << 1) | bit;
                    if !on_path[depth].contains(&index) {
                        nodes.push(CopathNode { depth, index, seed: hash::child(&parent_seed, bit == 1) });
                    }
                }
            }
        }
        nodes.sort_by_key(|n| (n.depth, n.index));
        Ok(PuncturedKey {
            input_bits: self.input_bits,
            output_bits: self.output_bits,
            punctured: points.into_iter().collect(),
            nodes,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.root.to_vec();
        out.extend_from_slice(&(self.input_bits as u32).to_le_bytes());
        out.extend_from_slice(&(self.output_bits as u32).to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 40 {
            return Err(PrimitiveError::Malformed(format!("key is {} bytes, expected 40", bytes.len())));
        }
        let mut r = Reader(bytes);
        let root = r.array::<32>()?;
        let input_bits = r.u32()? as usize;
        let output_bits = r.u32()? as usize;
        Self::new(root, input_bits, output_bits)
    }
}

impl Prf for PprfKey {
    fn input_bits(&self) -> usize {
        self.input_bits
    }

    fn output_bits(&self) -> usize {
        self.output_bits
    }

    fn eval(&self, x: u64) -> Result<Vec<u8>> {
        check_input(x, self.input_bits)?;
        let leaf = descend(self.root, x, self.input_bits);
        Ok(hash::expand(&leaf, self.output_bits / 8))
    }
}

/// Subtree root held by a punctured key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopathNode {
    /// Number of input bits fixed by this node.
    pub depth: usize,
    /// The fixed prefix, as an integer of `depth` bits.
    pub index: u64,
    pub seed: Digest32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuncturedKey {
    input_bits: usize,
    output_bits: usize,
    punctured: Vec<u64>,
    nodes: Vec<CopathNode>,
}

impl PuncturedKey {
    pub fn punctured_set(&self) -> &[u64] {
        &self.punctured
    }

    pub fn copath(&self) -> &[CopathNode] {
        &self.nodes
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.input_bits as u32).to_le_bytes());
        out.extend_from_slice(&(self.output_bits as u32).to_le_bytes());
        out.extend_from_slice(&(self.punctured.len() as u32).to_le_bytes());
        for x in &self.punctured {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.extend_from_slice(&(self.nodes.len() as u32).to_le_bytes());
        for n in &self.nodes {
            out.push(n.depth as u8);
            out.extend_from_slice(&n.index.to_le_bytes());
            out.extend_from_slice(&n.seed);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader(bytes);
        let input_bits = r.u32()? as usize;
        let output_bits = r.u32()? as usize;
        check_params(input_bits, output_bits)?;
        let count = r.u32()? as usize;
        if count == 0 || count > MAX_PUNCTURE {
            return Err(PrimitiveError::Malformed(format!("puncture set size {count}")));
        }
        let punctured = (0..count).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let node_count = r.u32()? as usize;
        if node_count > MAX_PUNCTURE * MAX_INPUT_BITS {
            return Err(PrimitiveError::Malformed(format!("{node_count} copath nodes")));
        }
        let mut nodes = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            let depth = r.u8()? as usize;
            let index = r.u64()?;
            let seed = r.array::<32>()?;
            if depth == 0 || depth > input_bits {
                return Err(PrimitiveError::Malformed(format!("node depth {depth}")));
            }
            nodes.push(CopathNode { depth, index, seed });
        }
        if !r.0.is_empty() {
            return Err(PrimitiveError::Malformed("trailing bytes".into()));
        }
        Ok(Self { input_bits, output_bits, punctured, nodes })
    }
}

impl Prf for PuncturedKey {
    fn input_bits(&self) -> usize {
        self.input_bits
    }

    fn output_bits(&self) -> usize {
        self.output_bits
    }

    fn eval(&self, x: u64) -> Result<Vec<u8>> {
        check_input(x, self.input_bits)?;
        if self.punctured.binary_search(&x).is_ok() {
            return Err(PrimitiveError::Punctured(x));
        }
        let node = self
            .nodes
            .iter()
            .find(|n| prefix(x, self.input_bits, n.depth) == n.index)
            .ok_or_else(|| PrimitiveError::Malformed("no copath node covers the input".into()))?;
        let remaining = self.input_bits - node.depth;
        let leaf = descend(node.seed, low_bits(x, remaining), remaining);
        Ok(hash::expand(&leaf, self.output_bits / 8))
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.0.len() < n {
            return Err(PrimitiveError::Malformed("truncated".into()));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
}
