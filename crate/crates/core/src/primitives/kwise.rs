//! Polynomial k-wise independent families over GF(2^m).
//!
//! A random polynomial of degree `< 2k` over a field is `2k`-wise
//! independent on distinct field points. Outputs narrower than `m` take the
//! top bits of the field element; wider outputs stretch it with SHA-256.

use std::sync::OnceLock;

use rand::Rng;

use super::hash;
use super::{PrimitiveError, Result};

pub const MAX_FIELD_BITS: u32 = 32;

/// `GF(2)[x]` remainder of `a` modulo `m`.
fn poly_mod(mut a: u64, m: u64) -> u64 {
    let dm = 63 - m.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= dm {
        a ^= m << (63 - a.leading_zeros() - dm);
    }
    a
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

fn poly_mulmod(mut a: u64, mut b: u64, m: u64) -> u64 {
    let deg = 63 - m.leading_zeros();
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a >> deg) & 1 == 1 {
            a ^= m;
        }
    }
    acc
}

/// Ben-Or test: `f` of degree `d` is irreducible iff
/// `gcd(x^(2^i) − x, f) = 1` for every `1 ≤ i ≤ d/2`.
fn is_irreducible(f: u64) -> bool {
    let d = 63 - f.leading_zeros();
    let mut power = 0b10u64;
    for _ in 0..d / 2 {
        power = poly_mulmod(power, power, f);
        if poly_gcd(f, power ^ 0b10) != 1 {
            return false;
        }
    }
    true
}

/// Lexicographically smallest irreducible polynomial of degree `m`.
fn modulus_for(m: u32) -> u64 {
    static CACHE: [OnceLock<u64>; MAX_FIELD_BITS as usize + 1] = [const { OnceLock::new() }; 33];
    *CACHE[m as usize].get_or_init(|| {
        (1u64..)
            .step_by(2)
            .map(|low| (1u64 << m) | low)
            .find(|&f| is_irreducible(f))
            .expect("irreducible polynomials exist in every degree")
    })
}

/// The field GF(2^m), elements stored in the low `m` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gf2m {
    m: u32,
    modulus: u64,
}

impl Gf2m {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_FIELD_BITS {
            return Err(PrimitiveError::InvalidParameters(format!("field exponent {m} not in 1..=32")));
        }
        Ok(Self { m, modulus: modulus_for(m) })
    }

    pub fn bits(&self) -> u32 {
        self.m
    }

    /// Defining polynomial, including the leading `x^m` term.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        1u64 << self.m
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        poly_mulmod(a, b, self.modulus)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KwiseFunction {
    field: Gf2m,
    k: usize,
    coefficients: Vec<u64>,
    output_bits: usize,
}

impl KwiseFunction {
    /// `coefficients[i]` multiplies `x^i`; there must be exactly `2k`.
    pub fn new(k: usize, m: u32, coefficients: Vec<u64>, output_bits: usize) -> Result<Self> {
        let field = Gf2m::new(m)?;
        if k == 0 || coefficients.len() != 2 * k {
            return Err(PrimitiveError::InvalidParameters(format!(
                "{} coefficients for k = {k}",
                coefficients.len()
            )));
        }
        if output_bits == 0 || output_bits > 64 {
            return Err(PrimitiveError::InvalidParameters(format!("output width {output_bits} not in 1..=64")));
        }
        if let Some(&c) = coefficients.iter().find(|&&c| c >= field.order()) {
            return Err(PrimitiveError::InputOutOfRange { value: c, bits: m as usize });
        }
        Ok(Self { field, k, coefficients, output_bits })
    }

    pub fn random(k: usize, m: u32, output_bits: usize, rng: &mut impl Rng) -> Result<Self> {
        let field = Gf2m::new(m)?;
        let coefficients = (0..2 * k).map(|_| rng.random_range(0..field.order())).collect();
        Self::new(k, m, coefficients, output_bits)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> Gf2m {
        self.field
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    pub fn output_bits(&self) -> usize {
        self.output_bits
    }

    /// Raw polynomial value in the field (Horner's rule).
    pub fn field_value(&self, x: u64) -> Result<u64> {
        if x >= self.field.order() {
            return Err(PrimitiveError::InputOutOfRange { value: x, bits: self.field.m as usize });
        }
        Ok(self.coefficients.iter().rev().fold(0, |acc, &c| self.field.mul(acc, x) ^ c))
    }

    pub fn eval(&self, x: u64) -> Result<u64> {
        let v = self.field_value(x)?;
        let m = self.field.m as usize;
        if self.output_bits <= m {
            return Ok(v >> (m - self.output_bits));
        }
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&v.to_le_bytes());
        let wide = u64::from_le_bytes(hash::expand(&seed, 8).try_into().expect("8 bytes"));
        Ok(if self.output_bits == 64 { wide } else { wide >> (64 - self.output_bits) })
    }
}
