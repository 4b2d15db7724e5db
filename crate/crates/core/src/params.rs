//! Parameter sets for the HPPK schemes.
//!
//! A configuration `(|p|, n, lambda, m)` fixes the field prime (the largest
//! prime below `2^|p|`), the degree `n` of the base polynomial in `x`, the
//! degree `lambda` of `f` and `h`, and the number `m` of noise variables. The
//! hidden-ring width is `L = 2|p| + 8` and the Barrett radix width is
//! `K = L + 32`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::ring_arith::{WideUint, BARRETT_MARGIN_BITS};

/// Largest primes below `2^32`, `2^48`, `2^64`, `2^96` and `2^128`.
pub const PRIME_32: u64 = 4_294_967_291;
pub const PRIME_48: u64 = 281_474_976_710_597;
pub const PRIME_64: u64 = 18_446_744_073_709_551_557;
pub const PRIME_96: u128 = 79_228_162_514_264_337_593_543_950_319;
pub const PRIME_128: u128 = 340_282_366_920_938_463_463_374_607_431_768_211_297;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SecurityLevel {
    I,
    III,
    V,
}

impl fmt::Display for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SecurityLevel::I => "I",
            SecurityLevel::III => "III",
            SecurityLevel::V => "V",
        })
    }
}

impl FromStr for SecurityLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(SecurityLevel::I),
            "III" | "3" => Ok(SecurityLevel::III),
            "V" | "5" => Ok(SecurityLevel::V),
            other => Err(Error::param(format!("unknown security level {other:?}"))),
        }
    }
}

/// The nine published configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamSet {
    Kem32M2,
    Kem32M3,
    Ds64,
    Kem48M2,
    Kem48M3,
    Ds96,
    Kem64M2,
    Kem64M3,
    Ds128,
}

impl ParamSet {
    pub const ALL: [ParamSet; 9] = [
        ParamSet::Kem32M2,
        ParamSet::Kem32M3,
        ParamSet::Ds64,
        ParamSet::Kem48M2,
        ParamSet::Kem48M3,
        ParamSet::Ds96,
        ParamSet::Kem64M2,
        ParamSet::Kem64M3,
        ParamSet::Ds128,
    ];

    pub const KEM: [ParamSet; 6] = [
        ParamSet::Kem32M2,
        ParamSet::Kem32M3,
        ParamSet::Kem48M2,
        ParamSet::Kem48M3,
        ParamSet::Kem64M2,
        ParamSet::Kem64M3,
    ];

    pub const DS: [ParamSet; 3] = [ParamSet::Ds64, ParamSet::Ds96, ParamSet::Ds128];

    /// `(|p|, n, lambda, m)`.
    pub fn shape(self) -> (u32, usize, usize, usize) {
        match self {
            ParamSet::Kem32M2 => (32, 1, 1, 2),
            ParamSet::Kem32M3 => (32, 1, 1, 3),
            ParamSet::Ds64 => (64, 1, 1, 1),
            ParamSet::Kem48M2 => (48, 1, 1, 2),
            ParamSet::Kem48M3 => (48, 1, 1, 3),
            ParamSet::Ds96 => (96, 1, 1, 1),
            ParamSet::Kem64M2 => (64, 1, 1, 2),
            ParamSet::Kem64M3 => (64, 1, 1, 3),
            ParamSet::Ds128 => (128, 1, 1, 1),
        }
    }

    pub fn is_signature_set(self) -> bool {
        matches!(self, ParamSet::Ds64 | ParamSet::Ds96 | ParamSet::Ds128)
    }

    pub fn level(self) -> SecurityLevel {
        match self {
            ParamSet::Kem32M2 | ParamSet::Kem32M3 | ParamSet::Ds64 => SecurityLevel::I,
            ParamSet::Kem48M2 | ParamSet::Kem48M3 | ParamSet::Ds96 => SecurityLevel::III,
            ParamSet::Kem64M2 | ParamSet::Kem64M3 | ParamSet::Ds128 => SecurityLevel::V,
        }
    }

    /// Digest width for message hashing: 32 bytes for the KEM rows, and
    /// 32/48/64 bytes for the signature rows of levels I/III/V.
    pub fn digest_bytes(self) -> usize {
        match self {
            ParamSet::Ds96 => 48,
            ParamSet::Ds128 => 64,
            _ => 32,
        }
    }

    /// The signature configuration of a level, which also carries the full
    /// key triple.
    pub fn signature_set(level: SecurityLevel) -> ParamSet {
        match level {
            SecurityLevel::I => ParamSet::Ds64,
            SecurityLevel::III => ParamSet::Ds96,
            SecurityLevel::V => ParamSet::Ds128,
        }
    }

    pub fn params(self) -> HppkParams {
        let (p_bits, n, lambda, m) = self.shape();
        let mut params =
            HppkParams::new(p_bits, n, lambda, m).expect("published parameter sets are valid");
        params.set = Some(self);
        params.digest_bytes = self.digest_bytes();
        params
    }

    pub fn from_shape(p_bits: u32, n: usize, lambda: usize, m: usize) -> Option<ParamSet> {
        Self::ALL
            .into_iter()
            .find(|s| s.shape() == (p_bits, n, lambda, m))
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, n, l, m) = self.shape();
        let kind = if self.is_signature_set() { "DS" } else { "KEM" };
        write!(f, "{kind}-({p},{n},{l},{m})")
    }
}

impl FromStr for ParamSet {
    type Err = Error;

    /// Accepts `KEM-(32,1,1,2)` as well as `kem-32-1-1-2`.
    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<String> = s
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_ascii_lowercase)
            .collect();
        ParamSet::ALL
            .into_iter()
            .find(|set| {
                let (p, n, l, m) = set.shape();
                let kind = if set.is_signature_set() { "ds" } else { "kem" };
                let want = [
                    kind.to_string(),
                    p.to_string(),
                    n.to_string(),
                    l.to_string(),
                    m.to_string(),
                ];
                tokens == want
            })
            .ok_or_else(|| Error::param(format!("unknown parameter set {s:?}")))
    }
}

/// Concrete scheme parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HppkParams {
    pub p: WideUint,
    pub p_bits: u32,
    /// Degree of the base polynomial in `x`.
    pub n: usize,
    /// Degree of `f` and `h`.
    pub lambda: usize,
    /// Number of noise variables.
    pub m: usize,
    /// `L`, bit width of the hidden moduli.
    pub ring_bits: u32,
    /// `K`, the Barrett radix width.
    pub barrett_bits: u32,
    pub digest_bytes: usize,
    pub set: Option<ParamSet>,
}

pub type KemParams = HppkParams;
pub type DsParams = HppkParams;

impl HppkParams {
    /// Parameters with the default ring width `L = 2|p| + 8`.
    pub fn new(p_bits: u32, n: usize, lambda: usize, m: usize) -> Result<Self> {
        Self::with_ring_bits(p_bits, n, lambda, m, 2 * p_bits + 8)
    }

    /// Parameters with an explicit ring width, for small experimental rings.
    pub fn with_ring_bits(
        p_bits: u32,
        n: usize,
        lambda: usize,
        m: usize,
        ring_bits: u32,
    ) -> Result<Self> {
        if lambda != 1 {
            return Err(Error::param(
                "only linear f and h (lambda = 1) are supported",
            ));
        }
        if m == 0 {
            return Err(Error::param("at least one noise variable is required"));
        }
        if ring_bits < 8 {
            return Err(Error::param("hidden ring must be at least 8 bits"));
        }
        let p = largest_prime_below_pow2(p_bits)?;
        let barrett_bits = ring_bits + BARRETT_MARGIN_BITS as u32;
        let params = HppkParams {
            p,
            p_bits,
            n,
            lambda,
            m,
            ring_bits,
            barrett_bits,
            digest_bytes: 32,
            set: None,
        };
        if !params.ring_is_decryptable() {
            return Err(Error::param(format!(
                "ring width {ring_bits} too small for {} terms over a {p_bits}-bit field",
                params.terms()
            )));
        }
        Ok(params)
    }

    /// Rebuild parameters from a serialized header.
    pub fn from_header(
        p_bits: u32,
        n: usize,
        lambda: usize,
        m: usize,
        ring_bits: u32,
    ) -> Result<Self> {
        if let Some(set) = ParamSet::from_shape(p_bits, n, lambda, m) {
            let params = set.params();
            if params.ring_bits == ring_bits {
                return Ok(params);
            }
        }
        Self::with_ring_bits(p_bits, n, lambda, m, ring_bits)
    }

    /// Rows of the public matrices: `n + lambda + 1`.
    pub fn rows(&self) -> usize {
        self.n + self.lambda + 1
    }

    /// Number of encrypted coefficients per public matrix.
    pub fn terms(&self) -> usize {
        self.rows() * self.m
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.p.clone())
    }

    pub fn level(&self) -> Option<SecurityLevel> {
        self.set.map(ParamSet::level)
    }

    /// Byte width of a field element.
    pub fn field_bytes(&self) -> usize {
        self.p_bits.div_ceil(8) as usize
    }

    /// Byte width of a value below `2^L`.
    pub fn ring_bytes(&self) -> usize {
        self.ring_bits.div_ceil(8) as usize
    }

    /// Byte width of a value below `2^K`.
    pub fn barrett_bytes(&self) -> usize {
        self.barrett_bits.div_ceil(8) as usize
    }

    /// Bit bound on a ciphertext component: each of the `terms` products is
    /// below `2^L * p`.
    pub fn ciphertext_bits(&self) -> u32 {
        let terms = self.terms() as u64;
        let term_bits = 64 - terms.leading_zeros();
        self.ring_bits + self.p_bits + term_bits
    }

    pub fn ciphertext_field_bytes(&self) -> usize {
        self.ciphertext_bits().div_ceil(8) as usize
    }

    /// `terms * (p - 1)^2 < 2^(L-1)`, so the plain evaluation stays below any
    /// `L`-bit modulus and survives the hidden-ring round trip.
    pub fn ring_is_decryptable(&self) -> bool {
        decryptability_holds(&self.p, self.terms(), self.ring_bits)
    }
}

pub(crate) fn decryptability_holds(p: &WideUint, terms: usize, ring_bits: u32) -> bool {
    let pm1 = p.checked_sub(&WideUint::one()).unwrap_or_default();
    let bound = pm1
        .checked_mul(&pm1)
        .and_then(|sq| sq.checked_mul(&WideUint::from(terms as u64)));
    match (bound, WideUint::pow2(u64::from(ring_bits) - 1)) {
        (Ok(b), Ok(limit)) => b < limit,
        _ => false,
    }
}

/// Largest prime below `2^bits`. Widths up to 64 bits are searched with a
/// deterministic Miller-Rabin test; 96 and 128 bits use pinned values.
pub fn largest_prime_below_pow2(bits: u32) -> Result<WideUint> {
    match bits {
        96 => Ok(WideUint::from(PRIME_96)),
        128 => Ok(WideUint::from(PRIME_128)),
        2..=64 => {
            let top = if bits == 64 {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            };
            let p = (2..=top)
                .rev()
                .find(|&c| is_prime_u64(c))
                .expect("a prime exists below every power of two >= 4");
            Ok(WideUint::from(p))
        }
        _ => Err(Error::param(format!(
            "no field prime available for {bits} bits"
        ))),
    }
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    acc
}

/// Miller-Rabin with the first twelve prime bases, deterministic for all
/// 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_shapes_and_widths() {
        let p = ParamSet::Kem32M2.params();
        assert_eq!(
            (p.ring_bits, p.barrett_bits, p.rows(), p.terms()),
            (72, 104, 3, 6)
        );
        assert_eq!(p.p, WideUint::from(PRIME_32));
        let v = ParamSet::Ds128.params();
        assert_eq!((v.ring_bits, v.barrett_bits), (264, 296));
        assert_eq!(v.digest_bytes, 64);
        for set in ParamSet::ALL {
            assert!(set.params().ring_is_decryptable(), "{set}");
            assert_eq!(set.to_string().parse::<ParamSet>().unwrap(), set);
        }
        assert_eq!(
            "kem-48-1-1-3".parse::<ParamSet>().unwrap(),
            ParamSet::Kem48M3
        );
        assert!("kem-48-1-1-4".parse::<ParamSet>().is_err());
    }

    #[test]
    fn pinned_primes_match_search() {
        assert_eq!(largest_prime_below_pow2(3).unwrap(), WideUint::from(7u64));
        assert_eq!(largest_prime_below_pow2(8).unwrap(), WideUint::from(251u64));
        assert_eq!(
            largest_prime_below_pow2(32).unwrap(),
            WideUint::from(PRIME_32)
        );
        assert_eq!(
            largest_prime_below_pow2(48).unwrap(),
            WideUint::from(PRIME_48)
        );
        assert_eq!(
            largest_prime_below_pow2(64).unwrap(),
            WideUint::from(PRIME_64)
        );
        assert!(largest_prime_below_pow2(80).is_err());
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let limit = 20_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (i, &prime) in sieve.iter().enumerate() {
            assert_eq!(is_prime_u64(i as u64), prime, "{i}");
        }
    }

    #[test]
    fn small_rings_are_checked() {
        assert!(HppkParams::with_ring_bits(3, 1, 1, 1, 8).is_ok());
        // 4 terms * 36 = 144 >= 128
        assert!(HppkParams::with_ring_bits(3, 2, 1, 1, 8).is_err());
        assert!(HppkParams::new(3, 1, 2, 1).is_err());
        assert!(HppkParams::new(3, 1, 1, 0).is_err());
    }

    #[test]
    fn level_parsing() {
        assert_eq!("iii".parse::<SecurityLevel>().unwrap(), SecurityLevel::III);
        assert_eq!(ParamSet::signature_set(SecurityLevel::V), ParamSet::Ds128);
        assert!("IV".parse::<SecurityLevel>().is_err());
    }
}
