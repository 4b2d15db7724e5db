//! The modular multiplicative permutation `a -> R * a mod S` over a hidden
//! ring `Z_S`.
//!
//! The operator is additively and scalar homomorphic:
//! `E(a + b) = E(a) + E(b) mod S` and `E(c * a) = c * E(a) mod S`. Applying
//! it to polynomial coefficients over `F_p` keeps polynomial evaluation
//! decryptable as long as the plain evaluation stays below `S`.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::params::decryptability_holds;
use crate::ring_arith::{gcd, inv_mod, mul_mod, WideUint};

/// Coprime pair `(R, S)` with `S` exactly `L` bits wide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingOperator {
    multiplier: WideUint,
    modulus: WideUint,
    inverse: WideUint,
    bits: u32,
}

impl RingOperator {
    /// Builds an operator from explicit values, checking
    /// `2^(L-1) <= S < 2^L`, `1 <= R < S` and `gcd(R, S) = 1`.
    pub fn new(multiplier: WideUint, modulus: WideUint, bits: u32) -> Result<Self> {
        if bits < 2 || modulus.bits() != u64::from(bits) {
            return Err(Error::param("hidden modulus is not exactly L bits"));
        }
        if multiplier.is_zero() || multiplier >= modulus {
            return Err(Error::param("multiplier outside [1, S)"));
        }
        if !gcd(&multiplier, &modulus)?.is_one() {
            return Err(Error::NotInvertible);
        }
        let inverse = inv_mod(&multiplier, &modulus)?;
        Ok(RingOperator {
            multiplier,
            modulus,
            inverse,
            bits,
        })
    }

    /// Samples `S` uniformly from `[2^(L-1), 2^L)` and then `R` uniformly from
    /// `[1, S)` until `gcd(R, S) = 1`.
    pub fn generate<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> Result<Self> {
        Self::generate_counting(rng, bits).map(|(op, _)| op)
    }

    /// Like [`RingOperator::generate`], also returning how many multiplier
    /// draws were needed.
    pub fn generate_counting<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> Result<(Self, u32)> {
        if bits < 8 {
            return Err(Error::param("hidden ring must be at least 8 bits"));
        }
        let top = WideUint::pow2(u64::from(bits) - 1)?;
        let modulus = WideUint::random_bits(rng, u64::from(bits) - 1)?.checked_add(&top)?;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let multiplier = WideUint::random_below(rng, &modulus)?;
            if multiplier.is_zero() {
                continue;
            }
            if gcd(&multiplier, &modulus)?.is_one() {
                let inverse = inv_mod(&multiplier, &modulus)?;
                let op = RingOperator {
                    multiplier,
                    modulus,
                    inverse,
                    bits,
                };
                return Ok((op, attempts));
            }
        }
    }

    pub fn multiplier(&self) -> &WideUint {
        &self.multiplier
    }

    pub fn modulus(&self) -> &WideUint {
        &self.modulus
    }

    pub fn inverse(&self) -> &WideUint {
        &self.inverse
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `R * a mod S`.
    pub fn apply(&self, a: &WideUint) -> Result<WideUint> {
        if a >= &self.modulus {
            return Err(Error::param("operand outside the hidden ring"));
        }
        mul_mod(&self.multiplier, a, &self.modulus)
    }

    /// `R^-1 * c mod S`.
    pub fn invert(&self, c: &WideUint) -> Result<WideUint> {
        if c >= &self.modulus {
            return Err(Error::param("operand outside the hidden ring"));
        }
        mul_mod(&self.inverse, c, &self.modulus)
    }

    /// Encrypts every coefficient of a polynomial over `F_p`. The coefficient
    /// count is taken as the number of polynomial terms; the ring must be wide
    /// enough that `terms * (p-1)^2` stays below `S`.
    pub fn encrypt_coefficients(&self, coeffs: &[WideUint], p: &WideUint) -> Result<Vec<WideUint>> {
        if !decryptability_holds(p, coeffs.len(), self.bits) {
            return Err(Error::param(
                "hidden ring too small for decryptable evaluation",
            ));
        }
        coeffs
            .iter()
            .map(|c| {
                if c >= p {
                    Err(Error::param("coefficient outside F_p"))
                } else {
                    self.apply(c)
                }
            })
            .collect()
    }
}

/// Number of valid operators `(R, S)` with `S` exactly `bits` wide, by direct
/// enumeration of coprime pairs. Exponential; meant for small rings.
pub fn count_operators(bits: u32) -> u64 {
    assert!((2..=16).contains(&bits), "enumeration only for small rings");
    let lo = 1u64 << (bits - 1);
    let hi = 1u64 << bits;
    let mut count = 0;
    for s in lo..hi {
        for r in 1..s {
            let (mut a, mut b) = (r, s);
            while b != 0 {
                (a, b) = (b, a % b);
            }
            if a == 1 {
                count += 1;
            }
        }
    }
    count
}
