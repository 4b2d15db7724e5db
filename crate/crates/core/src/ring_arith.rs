//! Wide unsigned integers and the modular toolkit used by the hidden-ring
//! schemes: gcd, modular inverse, modular multiplication and Barrett
//! reduction.
//!
//! [`WideUint`] is capped at [`WIDE_BITS`] bits. Every operation that could
//! exceed the cap returns [`Error::Capacity`] instead of wrapping. None of the
//! arithmetic here is constant time.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand_core::RngCore;

use crate::error::{Error, Result};

/// Usable width of [`WideUint`] in bits.
///
/// The largest intermediate in the schemes is the verifier's `F * nu` product
/// at the 128-bit signature level: `L + K = 264 + 296 = 560` bits.
pub const WIDE_BITS: u64 = 1024;

/// Unsigned integer in `[0, 2^WIDE_BITS)`.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WideUint(BigUint);

impl fmt::Debug for WideUint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WideUint({})", self.0)
    }
}

impl fmt::Display for WideUint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<u64> for WideUint {
    fn from(v: u64) -> Self {
        WideUint(BigUint::from(v))
    }
}

impl From<u128> for WideUint {
    fn from(v: u128) -> Self {
        WideUint(BigUint::from(v))
    }
}

impl TryFrom<BigUint> for WideUint {
    type Error = Error;

    fn try_from(v: BigUint) -> Result<Self> {
        Self::checked(v, "value wider than WIDE_BITS")
    }
}

impl WideUint {
    fn checked(v: BigUint, what: &'static str) -> Result<Self> {
        if v.bits() > WIDE_BITS {
            Err(Error::Capacity(what))
        } else {
            Ok(WideUint(v))
        }
    }

    pub fn zero() -> Self {
        WideUint(BigUint::zero())
    }

    pub fn one() -> Self {
        WideUint(BigUint::one())
    }

    /// `2^k`.
    pub fn pow2(k: u64) -> Result<Self> {
        if k >= WIDE_BITS {
            return Err(Error::Capacity("power of two exceeds width"));
        }
        Ok(WideUint(BigUint::one() << k))
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_odd(&self) -> bool {
        self.0.bit(0)
    }

    /// Number of significant bits; zero has bit length 0.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    pub fn bit(&self, i: u64) -> bool {
        self.0.bit(i)
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn to_u128(&self) -> Option<u128> {
        self.0.to_u128()
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        Self::checked(&self.0 + &rhs.0, "addition overflow")
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        if self.0 < rhs.0 {
            return Err(Error::Underflow);
        }
        Ok(WideUint(&self.0 - &rhs.0))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        if self.bits() + rhs.bits() > WIDE_BITS + 1 {
            return Err(Error::Capacity("multiplication overflow"));
        }
        Self::checked(&self.0 * &rhs.0, "multiplication overflow")
    }

    /// `(self / rhs, self % rhs)`.
    pub fn div_rem(&self, rhs: &Self) -> Result<(Self, Self)> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok((WideUint(&self.0 / &rhs.0), WideUint(&self.0 % &rhs.0)))
    }

    pub fn rem(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(WideUint(&self.0 % &rhs.0))
    }

    pub fn shr(&self, k: u64) -> Self {
        WideUint(&self.0 >> k)
    }

    pub fn shl(&self, k: u64) -> Result<Self> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if self.bits() + k > WIDE_BITS {
            return Err(Error::Capacity("shift overflow"));
        }
        Ok(WideUint(&self.0 << k))
    }

    /// Big-endian encoding in exactly `len` bytes.
    pub fn to_be_bytes(&self, len: usize) -> Result<Vec<u8>> {
        let raw = self.0.to_bytes_be();
        if self.is_zero() {
            return Ok(vec![0u8; len]);
        }
        if raw.len() > len {
            return Err(Error::Capacity(
                "value does not fit the requested byte width",
            ));
        }
        let mut out = vec![0u8; len - raw.len()];
        out.extend_from_slice(&raw);
        Ok(out)
    }

    pub fn from_be_bytes(bytes: &[u8]) -> Result<Self> {
        Self::checked(
            BigUint::from_bytes_be(bytes),
            "encoded value wider than WIDE_BITS",
        )
    }

    /// Uniform value in `[0, 2^bits)`.
    pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> Result<Self> {
        if bits > WIDE_BITS {
            return Err(Error::Capacity("random draw wider than WIDE_BITS"));
        }
        if bits == 0 {
            return Ok(Self::zero());
        }
        let len = bits.div_ceil(8) as usize;
        let mut buf = vec![0u8; len];
        rng.try_fill_bytes(&mut buf)
            .map_err(|e| Error::Generation(e.to_string()))?;
        let excess = (len as u64) * 8 - bits;
        buf[0] &= 0xffu8 >> excess;
        Ok(WideUint(BigUint::from_bytes_be(&buf)))
    }

    /// Uniform value in `[0, bound)` by rejection sampling.
    pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &Self) -> Result<Self> {
        if bound.is_zero() {
            return Err(Error::param("empty sampling range"));
        }
        let bits = (bound.0.clone() - 1u32).bits();
        loop {
            let v = Self::random_bits(rng, bits)?;
            if &v < bound {
                return Ok(v);
            }
        }
    }
}

/// Greatest common divisor by the Euclidean algorithm.
pub fn gcd(a: &WideUint, b: &WideUint) -> Result<WideUint> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::param("gcd(0, 0) is undefined"));
    }
    let (mut x, mut y) = (a.0.clone(), b.0.clone());
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    Ok(WideUint(x))
}

/// `a * b mod s` for `a, b < s`.
pub fn mul_mod(a: &WideUint, b: &WideUint, s: &WideUint) -> Result<WideUint> {
    if s.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if a >= s || b >= s {
        return Err(Error::param("mul_mod operand not reduced"));
    }
    a.checked_mul(b)?.rem(s)
}

/// Multiplicative inverse of `a` modulo `s` via the extended Euclidean
/// algorithm. Requires `0 <= a < s`, `s > 1` and `gcd(a, s) = 1`.
pub fn inv_mod(a: &WideUint, s: &WideUint) -> Result<WideUint> {
    if s.0 <= BigUint::one() {
        return Err(Error::param("inverse modulus must exceed 1"));
    }
    if a >= s {
        return Err(Error::param("inv_mod operand not reduced"));
    }
    let m = &s.0;
    // Invariant: t_prev * a == r_prev (mod m), t * a == r (mod m).
    let (mut r_prev, mut r) = (a.0.clone(), m.clone());
    let (mut t_prev, mut t) = (BigUint::one(), BigUint::zero());
    while !r.is_zero() {
        let q = &r_prev / &r;
        let r_next = &r_prev - &q * &r;
        let qt = (&q * &t) % m;
        let t_next = (&t_prev + m - qt) % m;
        r_prev = std::mem::replace(&mut r, r_next);
        t_prev = std::mem::replace(&mut t, t_next);
    }
    if !r_prev.is_one() {
        return Err(Error::NotInvertible);
    }
    Ok(WideUint(t_prev))
}

/// Precomputed data for Barrett reduction modulo a fixed `modulus` with radix
/// `2^radix_bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarrettContext {
    modulus: WideUint,
    radix_bits: u64,
    barrett_radix: WideUint,
}

/// Extra radix bits beyond the modulus width at which the Barrett estimate is
/// exact except with probability about `2^-32`.
pub const BARRETT_MARGIN_BITS: u64 = 32;

impl BarrettContext {
    /// General context; needs `radix_bits >= bit_length(modulus)`. Results of
    /// [`barrett_reduce`] then lie in `[0, 2 * modulus)`.
    pub fn new(modulus: WideUint, radix_bits: u64) -> Result<Self> {
        if modulus.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if radix_bits < modulus.bits() {
            return Err(Error::param("Barrett radix narrower than the modulus"));
        }
        let barrett_radix = WideUint::pow2(radix_bits)?;
        Ok(BarrettContext {
            modulus,
            radix_bits,
            barrett_radix,
        })
    }

    /// Context with `K = bit_length(modulus) + 32`, the width used by the
    /// signature scheme.
    pub fn compressed(modulus: WideUint) -> Result<Self> {
        let k = modulus.bits() + BARRETT_MARGIN_BITS;
        Self::new(modulus, k)
    }

    pub fn modulus(&self) -> &WideUint {
        &self.modulus
    }

    pub fn radix_bits(&self) -> u64 {
        self.radix_bits
    }

    pub fn barrett_radix(&self) -> &WideUint {
        &self.barrett_radix
    }

    /// True when `K >= L + 32`.
    pub fn is_compressed(&self) -> bool {
        self.radix_bits >= self.modulus.bits() + BARRETT_MARGIN_BITS
    }
}

/// `floor(2^K * b / S)` for `b < S`.
pub fn barrett_mu(b: &WideUint, ctx: &BarrettContext) -> Result<WideUint> {
    if b >= &ctx.modulus {
        return Err(Error::param("Barrett operand not reduced"));
    }
    Ok(b.shl(ctx.radix_bits)?.div_rem(&ctx.modulus)?.0)
}

/// `floor(a * mu / 2^K)`: the quotient estimate, computable without the
/// modulus.
pub fn barrett_quotient(a: &WideUint, mu: &WideUint, radix_bits: u64) -> Result<WideUint> {
    Ok(a.checked_mul(mu)?.shr(radix_bits))
}

/// `a * b - S * floor(a * mu / 2^K)`.
///
/// The result is congruent to `a * b` modulo `S` and lies in `[0, 2S)`; it is
/// NOT conditionally reduced. Requires `a < 2^K` and `mu = barrett_mu(b)`.
pub fn barrett_reduce(
    a: &WideUint,
    b: &WideUint,
    mu: &WideUint,
    ctx: &BarrettContext,
) -> Result<WideUint> {
    if a >= &ctx.barrett_radix {
        return Err(Error::param("Barrett multiplicand exceeds the radix"));
    }
    let q = barrett_quotient(a, mu, ctx.radix_bits)?;
    a.checked_mul(b)?.checked_sub(&ctx.modulus.checked_mul(&q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::ChaCha20Rng;
    use rand_core::SeedableRng;

    fn w(v: u64) -> WideUint {
        WideUint::from(v)
    }

    #[test]
    fn mul_mod_small_cases() {
        assert_eq!(mul_mod(&w(0), &w(5), &w(7)).unwrap(), w(0));
        assert_eq!(mul_mod(&w(3), &w(5), &w(7)).unwrap(), w(1));
        assert!(mul_mod(&w(7), &w(1), &w(7)).is_err());
        assert_eq!(mul_mod(&w(1), &w(1), &w(0)), Err(Error::DivisionByZero));
    }

    #[test]
    fn mul_mod_matches_repeated_subtraction() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let s = WideUint::random_bits(&mut rng, 20)
            .unwrap()
            .checked_add(&w(1 << 20))
            .unwrap();
        for _ in 0..20 {
            let a = WideUint::random_below(&mut rng, &s).unwrap();
            let b = WideUint::random_below(&mut rng, &s).unwrap();
            let mut prod = a.checked_mul(&b).unwrap();
            // Oracle: subtract shifted copies of s until the product is reduced.
            for shift in (0..=prod.bits()).rev() {
                let chunk = s.shl(shift).unwrap();
                while prod >= chunk {
                    prod = prod.checked_sub(&chunk).unwrap();
                }
            }
            assert_eq!(mul_mod(&a, &b, &s).unwrap(), prod);
        }
    }

    #[test]
    fn inverse_small_cases() {
        assert_eq!(inv_mod(&w(1), &w(19)).unwrap(), w(1));
        assert_eq!(inv_mod(&w(3), &w(7)).unwrap(), w(5));
        assert_eq!(inv_mod(&w(6), &w(9)), Err(Error::NotInvertible));
        assert_eq!(inv_mod(&w(0), &w(9)), Err(Error::NotInvertible));
        assert!(inv_mod(&w(10), &w(9)).is_err());
        assert!(inv_mod(&w(0), &w(1)).is_err());
    }

    #[test]
    fn inverse_exhaustive_mod_251() {
        for a in 1..251u64 {
            let brute = (1..251u64).find(|t| a * t % 251 == 1).unwrap();
            assert_eq!(inv_mod(&w(a), &w(251)).unwrap(), w(brute), "a = {a}");
        }
    }

    #[test]
    fn gcd_small_cases() {
        assert_eq!(gcd(&w(42), &w(0)).unwrap(), w(42));
        assert_eq!(gcd(&w(0), &w(42)).unwrap(), w(42));
        assert_eq!(gcd(&w(12), &w(18)).unwrap(), w(6));
        assert!(gcd(&w(0), &w(0)).is_err());
    }

    fn trial_division_gcd(a: u64, b: u64) -> u64 {
        // Multiply together every common prime-power factor.
        let mut g = 1;
        let (mut a, mut b) = (a, b);
        let mut d = 2;
        while d <= a.min(b) {
            while a % d == 0 && b % d == 0 {
                g *= d;
                a /= d;
                b /= d;
            }
            while a % d == 0 {
                a /= d;
            }
            while b % d == 0 {
                b /= d;
            }
            d += 1;
        }
        if a == b && a > 1 {
            g *= a;
        }
        g
    }

    #[test]
    fn gcd_matches_trial_division_on_truncations() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..200 {
            let a = WideUint::random_bits(&mut rng, 72).unwrap();
            let b = WideUint::random_bits(&mut rng, 72).unwrap();
            let a16 = a.to_u128().unwrap() as u64 & 0xffff;
            let b16 = b.to_u128().unwrap() as u64 & 0xffff;
            if a16 == 0 || b16 == 0 {
                continue;
            }
            assert_eq!(
                gcd(&w(a16), &w(b16)).unwrap(),
                w(trial_division_gcd(a16, b16)),
                "{a16} {b16}"
            );
            // A common divisor of the full values divides both.
            let g = gcd(&a, &b).unwrap();
            assert!(a.rem(&g).unwrap().is_zero() && b.rem(&g).unwrap().is_zero());
        }
    }

    #[test]
    fn barrett_worked_example() {
        let ctx = BarrettContext::new(w(7), 8).unwrap();
        assert!(!ctx.is_compressed());
        let mu = barrett_mu(&w(3), &ctx).unwrap();
        assert_eq!(mu, w(109));
        assert_eq!(barrett_reduce(&w(5), &w(3), &mu, &ctx).unwrap(), w(1));
        assert_eq!(barrett_reduce(&w(0), &w(3), &mu, &ctx).unwrap(), w(0));
        assert_eq!(barrett_mu(&w(0), &ctx).unwrap(), w(0));
        assert!(barrett_mu(&w(7), &ctx).is_err());
        assert!(barrett_reduce(&w(256), &w(3), &mu, &ctx).is_err());
    }

    #[test]
    fn barrett_mu_matches_long_division() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let s = WideUint::random_bits(&mut rng, 71)
            .unwrap()
            .checked_add(&WideUint::pow2(71).unwrap())
            .unwrap();
        let ctx = BarrettContext::compressed(s.clone()).unwrap();
        assert_eq!(ctx.radix_bits(), 104);
        assert!(ctx.is_compressed());
        for _ in 0..50 {
            let b = WideUint::random_below(&mut rng, &s).unwrap();
            // Schoolbook binary long division of b * 2^104 by s.
            let num = b.shl(104).unwrap();
            let mut q = WideUint::zero();
            let mut r = WideUint::zero();
            for i in (0..num.bits()).rev() {
                r = r.shl(1).unwrap();
                if num.bit(i) {
                    r = r.checked_add(&w(1)).unwrap();
                }
                q = q.shl(1).unwrap();
                if r >= s {
                    r = r.checked_sub(&s).unwrap();
                    q = q.checked_add(&w(1)).unwrap();
                }
            }
            assert_eq!(barrett_mu(&b, &ctx).unwrap(), q);
        }
    }

    #[test]
    fn width_is_enforced() {
        let top = WideUint::pow2(WIDE_BITS - 1).unwrap();
        assert!(top.checked_add(&top).is_err());
        assert!(top.checked_mul(&w(2)).is_err());
        assert!(top.shl(1).is_err());
        assert!(WideUint::pow2(WIDE_BITS).is_err());
        assert_eq!(w(1).checked_sub(&w(2)), Err(Error::Underflow));
        assert!(WideUint::from_be_bytes(&[1u8; 129]).is_err());
        assert!(w(256).to_be_bytes(1).is_err());
        assert_eq!(w(0).to_be_bytes(2).unwrap(), vec![0, 0]);
    }

    fn arb_wide(bits: u64) -> impl Strategy<Value = WideUint> {
        proptest::collection::vec(any::<u8>(), (bits / 8) as usize)
            .prop_map(|v| WideUint::from_be_bytes(&v).unwrap())
    }

    proptest! {
        #[test]
        fn byte_round_trip(x in arb_wide(512)) {
            let enc = x.to_be_bytes(64).unwrap();
            prop_assert_eq!(WideUint::from_be_bytes(&enc).unwrap(), x);
        }

        #[test]
        fn mul_mod_commutes_through_identity(a in arb_wide(64), b in arb_wide(64), s in arb_wide(72)) {
            prop_assume!(s.bits() > 64);
            let via_one = mul_mod(&b, &WideUint::one(), &s).unwrap();
            prop_assert_eq!(mul_mod(&a, &via_one, &s).unwrap(), mul_mod(&b, &a, &s).unwrap());
        }

        #[test]
        fn inverse_multiplies_to_one(a in arb_wide(96), s in arb_wide(104)) {
            prop_assume!(s.bits() > 96);
            prop_assume!(gcd(&a, &s).unwrap().is_one());
            let t = inv_mod(&a, &s).unwrap();
            prop_assert!(!t.is_zero() && t < s);
            prop_assert!(mul_mod(&a, &t, &s).unwrap().is_one());
        }

        #[test]
        fn barrett_result_congruent_and_below_two_s(a in arb_wide(64), b in arb_wide(64), s in arb_wide(72)) {
            prop_assume!(s.bits() > 64);
            let ctx = BarrettContext::new(s.clone(), 72).unwrap();
            let mu = barrett_mu(&b, &ctx).unwrap();
            let r = barrett_reduce(&a, &b, &mu, &ctx).unwrap();
            prop_assert!(r < s.checked_add(&s).unwrap());
            prop_assert_eq!(r.rem(&s).unwrap(), mul_mod(&a, &b, &s).unwrap());
        }
    }
}
