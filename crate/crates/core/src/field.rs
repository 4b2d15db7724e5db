//! Arithmetic in the prime field `F_p` on top of [`WideUint`].

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::ring_arith::{inv_mod, mul_mod, WideUint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: WideUint,
}

impl PrimeField {
    pub fn new(p: WideUint) -> Self {
        PrimeField { p }
    }

    pub fn modulus(&self) -> &WideUint {
        &self.p
    }

    pub fn contains(&self, a: &WideUint) -> bool {
        a < &self.p
    }

    pub fn reduce(&self, a: &WideUint) -> WideUint {
        a.rem(&self.p).expect("field modulus is nonzero")
    }

    pub fn add(&self, a: &WideUint, b: &WideUint) -> WideUint {
        let s = a
            .checked_add(b)
            .expect("field elements are far below the width");
        self.reduce(&s)
    }

    pub fn sub(&self, a: &WideUint, b: &WideUint) -> WideUint {
        let a = self.reduce(a);
        let b = self.reduce(b);
        if a >= b {
            a.checked_sub(&b).expect("checked above")
        } else {
            a.checked_add(&self.p)
                .and_then(|t| t.checked_sub(&b))
                .expect("a + p > b")
        }
    }

    pub fn mul(&self, a: &WideUint, b: &WideUint) -> WideUint {
        mul_mod(&self.reduce(a), &self.reduce(b), &self.p).expect("reduced operands")
    }

    pub fn inv(&self, a: &WideUint) -> Result<WideUint> {
        inv_mod(&self.reduce(a), &self.p)
    }

    /// `x^e mod p` for small exponents.
    pub fn pow(&self, x: &WideUint, e: usize) -> WideUint {
        let mut acc = self.reduce(&WideUint::one());
        for _ in 0..e {
            acc = self.mul(&acc, x);
        }
        acc
    }

    /// Horner evaluation of `sum coeffs[i] * x^i`.
    pub fn eval(&self, coeffs: &[WideUint], x: &WideUint) -> WideUint {
        coeffs
            .iter()
            .rev()
            .fold(WideUint::zero(), |acc, c| self.add(&self.mul(&acc, x), c))
    }

    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<WideUint> {
        WideUint::random_below(rng, &self.p)
    }

    pub fn random_nonzero<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<WideUint> {
        if self.p.is_one() {
            return Err(Error::param("field has no nonzero elements"));
        }
        loop {
            let v = self.random(rng)?;
            if !v.is_zero() {
                return Ok(v);
            }
        }
    }
}
