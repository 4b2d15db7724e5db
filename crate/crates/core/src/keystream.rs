//! Deterministic bit streams derived from a seed with SHAKE256, and the
//! per-level message hash used by signatures.
//!
//! A stream is `SHAKE256(len(tag) || tag || seed)`, read most-significant bit
//! first. Distinct tags give independent streams from one seed.

use rand_core::{impls, CryptoRng, RngCore};
use sha3::digest::{Digest, ExtendableOutput, Update, XofReader};
use sha3::{Sha3_256, Sha3_384, Sha3_512, Shake256, Shake256Reader};

use crate::error::{Error, Result};
use crate::ring_arith::WideUint;

/// Pad generation (Fisher-Yates draws).
pub const TAG_PAD: &[u8] = b"QPP-pad";
/// Per-block XOR mask.
pub const TAG_PRERAND: &[u8] = b"QPP-prerand";
/// Per-block permutation selection.
pub const TAG_DISPATCH: &[u8] = b"QPP-dispatch";
/// Message hashing for signatures.
pub const TAG_HASH: &[u8] = b"HPPK-hash";
/// Seeded entropy for HPPK sampling (keys, noise, nonces).
pub const TAG_HPPK_ENTROPY: &[u8] = b"HPPK-u";

/// Anything that can hand out bits and bounded indices.
///
/// Implemented by [`Keystream`]; tests substitute fixed sources.
pub trait BitSource {
    /// Next `k` bits (`k <= 64`) as an integer, first bit most significant.
    fn next_bits(&mut self, k: u32) -> u64;

    /// Uniform index in `[0, bound)`. Draws `ceil(log2(bound))` bits and
    /// redraws while the value is out of range; `bound == 1` consumes nothing.
    fn next_index(&mut self, bound: u64) -> u64 {
        assert!(bound >= 1, "next_index bound must be positive");
        if bound == 1 {
            return 0;
        }
        let k = 64 - (bound - 1).leading_zeros();
        loop {
            let v = self.next_bits(k);
            if v < bound {
                return v;
            }
        }
    }
}

#[derive(Clone)]
pub struct Keystream {
    reader: Shake256Reader,
    // Unconsumed low bits of the last byte read, left-aligned count in `avail`.
    current: u8,
    avail: u32,
    consumed_bits: u64,
}

impl std::fmt::Debug for Keystream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Keystream")
            .field("consumed_bits", &self.consumed_bits)
            .finish_non_exhaustive()
    }
}

impl Keystream {
    pub fn new(seed: &[u8], tag: &[u8]) -> Self {
        assert!(tag.len() < 256, "domain tag too long");
        let mut xof = Shake256::default();
        xof.update(&[tag.len() as u8]);
        xof.update(tag);
        xof.update(seed);
        Keystream {
            reader: xof.finalize_xof(),
            current: 0,
            avail: 0,
            consumed_bits: 0,
        }
    }

    /// Bits handed out so far.
    pub fn consumed_bits(&self) -> u64 {
        self.consumed_bits
    }

    fn next_byte(&mut self) -> u8 {
        let mut b = [0u8; 1];
        self.reader.read(&mut b);
        b[0]
    }
}

impl BitSource for Keystream {
    fn next_bits(&mut self, k: u32) -> u64 {
        assert!(k <= 64, "at most 64 bits per draw");
        let mut out = 0u64;
        let mut need = k;
        while need > 0 {
            if self.avail == 0 {
                self.current = self.next_byte();
                self.avail = 8;
            }
            let take = need.min(self.avail);
            let shift = self.avail - take;
            let chunk = (self.current >> shift) & ((1u16 << take) - 1) as u8;
            out = (out << take) | u64::from(chunk);
            self.avail -= take;
            need -= take;
        }
        self.consumed_bits += u64::from(k);
        out
    }
}

impl RngCore for Keystream {
    fn next_u32(&mut self) -> u32 {
        impls::next_u32_via_fill(self)
    }

    fn next_u64(&mut self) -> u64 {
        impls::next_u64_via_fill(self)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        if self.avail == 0 {
            self.reader.read(dest);
            self.consumed_bits += 8 * dest.len() as u64;
        } else {
            for b in dest.iter_mut() {
                *b = self.next_bits(8) as u8;
            }
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand_core::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

impl CryptoRng for Keystream {}

/// Digest width in bytes to hash function: 32, 48 or 64.
pub fn message_digest(message: &[u8], digest_bytes: usize) -> Result<Vec<u8>> {
    fn run<D: Digest>(message: &[u8]) -> Vec<u8> {
        let mut d = D::new();
        Digest::update(&mut d, [TAG_HASH.len() as u8]);
        Digest::update(&mut d, TAG_HASH);
        Digest::update(&mut d, message);
        d.finalize().to_vec()
    }
    match digest_bytes {
        32 => Ok(run::<Sha3_256>(message)),
        48 => Ok(run::<Sha3_384>(message)),
        64 => Ok(run::<Sha3_512>(message)),
        other => Err(Error::param(format!("unsupported digest width {other}"))),
    }
}

/// `x = digest(message) mod p`, digest read big-endian.
pub fn hash_to_field(message: &[u8], p: &WideUint, digest_bytes: usize) -> Result<WideUint> {
    let digest = message_digest(message, digest_bytes)?;
    WideUint::from_be_bytes(&digest)?.rem(p)
}
