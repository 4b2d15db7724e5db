//! Quantum Permutation Pad.
//!
//! A pad is an ordered list of `M` secret permutations of the `n`-bit block
//! space. Each permutation is stored as a lookup table: `table[m]` is the
//! column holding the single `1` in row `m` of the permutation matrix, and the
//! inverse table is the transposed matrix.
//!
//! Stream encryption masks every block with keystream bits, picks a pad
//! permutation (keystream index or block counter) and applies it. Decryption
//! draws the same mask and index, applies the inverse permutation, then
//! removes the mask.

use crate::error::{Error, Result};
use crate::keystream::{BitSource, Keystream, TAG_DISPATCH, TAG_PAD, TAG_PRERAND};

pub const DEFAULT_BLOCK_BITS: u32 = 8;
pub const DEFAULT_PAD_SIZE: usize = 64;
pub const LIGHT_BLOCK_BITS: u32 = 4;
pub const LIGHT_PAD_SIZE: usize = 8;
pub const MAX_BLOCK_BITS: u32 = 16;

fn check_bits(bits: u32) -> Result<()> {
    if (1..=MAX_BLOCK_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(Error::param(format!(
            "block width must be 1..={MAX_BLOCK_BITS} bits, got {bits}"
        )))
    }
}

/// A bijection on `[0, 2^n)` usable as a pad entry.
pub trait BlockPermutation {
    fn block_bits(&self) -> u32;
    fn forward(&self, m: u16) -> u16;
    fn backward(&self, c: u16) -> u16;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    bits: u32,
    table: Vec<u16>,
    inverse: Vec<u16>,
}

impl Permutation {
    pub fn identity(bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let table: Vec<u16> = (0..1u32 << bits).map(|v| v as u16).collect();
        Ok(Permutation {
            bits,
            inverse: table.clone(),
            table,
        })
    }

    /// Validates that `table` is a bijection on `[0, 2^bits)`.
    pub fn from_table(bits: u32, table: Vec<u16>) -> Result<Self> {
        check_bits(bits)?;
        let size = 1usize << bits;
        if table.len() != size {
            return Err(Error::param(format!(
                "permutation table must have {size} entries"
            )));
        }
        let mut inverse = vec![u16::MAX; size];
        let mut seen = vec![false; size];
        for (m, &c) in table.iter().enumerate() {
            let c = usize::from(c);
            if c >= size || seen[c] {
                return Err(Error::param("table is not a bijection"));
            }
            seen[c] = true;
            inverse[c] = m as u16;
        }
        Ok(Permutation {
            bits,
            table,
            inverse,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn table(&self) -> &[u16] {
        &self.table
    }

    pub fn is_identity(&self) -> bool {
        self.table
            .iter()
            .enumerate()
            .all(|(i, &v)| usize::from(v) == i)
    }

    fn check_block(&self, v: u16) -> Result<()> {
        if u32::from(v) >= 1 << self.bits {
            Err(Error::param(format!(
                "block {v} exceeds {} bits",
                self.bits
            )))
        } else {
            Ok(())
        }
    }

    pub fn permute(&self, m: u16) -> Result<u16> {
        self.check_block(m)?;
        Ok(self.table[usize::from(m)])
    }

    pub fn permute_inv(&self, c: u16) -> Result<u16> {
        self.check_block(c)?;
        Ok(self.inverse[usize::from(c)])
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.bits != other.bits {
            return Err(Error::param(
                "cannot compose permutations of different widths",
            ));
        }
        let table = other
            .table
            .iter()
            .map(|&v| self.table[usize::from(v)])
            .collect();
        Permutation::from_table(self.bits, table)
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            bits: self.bits,
            table: self.inverse.clone(),
            inverse: self.table.clone(),
        }
    }

    /// Forward Fisher-Yates on `[0, 2^bits)`: position `i` swaps with
    /// `i + next_index(len - i)`. All-zero draws leave the identity.
    pub fn shuffle<S: BitSource + ?Sized>(source: &mut S, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let mut table: Vec<u16> = (0..1u32 << bits).map(|v| v as u16).collect();
        let len = table.len();
        for i in 0..len - 1 {
            let j = i + source.next_index((len - i) as u64) as usize;
            table.swap(i, j);
        }
        Permutation::from_table(bits, table)
    }
}

impl BlockPermutation for Permutation {
    fn block_bits(&self) -> u32 {
        self.bits
    }

    fn forward(&self, m: u16) -> u16 {
        self.table[usize::from(m)]
    }

    fn backward(&self, c: u16) -> u16 {
        self.inverse[usize::from(c)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationPad {
    bits: u32,
    perms: Vec<Permutation>,
}

impl PermutationPad {
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        let bits = perms
            .first()
            .ok_or_else(|| Error::param("pad must not be empty"))?
            .bits;
        if perms.iter().any(|p| p.bits != bits) {
            return Err(Error::param("pad permutations must share one block width"));
        }
        Ok(PermutationPad { bits, perms })
    }

    /// `M` Fisher-Yates shuffles driven by the `QPP-pad` stream of `seed`.
    pub fn generate(seed: &[u8], bits: u32, size: usize) -> Result<Self> {
        let mut ks = Keystream::new(seed, TAG_PAD);
        Self::generate_from(&mut ks, bits, size)
    }

    pub fn generate_from<S: BitSource + ?Sized>(
        source: &mut S,
        bits: u32,
        size: usize,
    ) -> Result<Self> {
        check_bits(bits)?;
        if size == 0 {
            return Err(Error::param("pad size must be at least 1"));
        }
        let perms = (0..size)
            .map(|_| Permutation::shuffle(source, bits))
            .collect::<Result<Vec<_>>>()?;
        Self::new(perms)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    /// Nominal classical key length `M * n * 2^n` bits.
    pub fn nominal_key_bits(&self) -> u128 {
        self.perms.len() as u128 * u128::from(self.bits) * (1u128 << self.bits)
    }
}

/// Shorthand for [`PermutationPad::generate`].
pub fn generate_pad(seed: &[u8], bits: u32, size: usize) -> Result<PermutationPad> {
    PermutationPad::generate(seed, bits, size)
}

/// How each block picks its pad permutation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DispatchMode {
    /// Keystream index from the `QPP-dispatch` stream.
    #[default]
    Random,
    /// Block counter modulo `M`.
    Sequential,
}

impl DispatchMode {
    pub fn to_byte(self) -> u8 {
        match self {
            DispatchMode::Random => 0,
            DispatchMode::Sequential => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(DispatchMode::Random),
            1 => Some(DispatchMode::Sequential),
            _ => None,
        }
    }
}

fn select<D: BitSource + ?Sized>(
    dispatch: &mut D,
    mode: DispatchMode,
    block: usize,
    size: usize,
) -> usize {
    match mode {
        DispatchMode::Random => dispatch.next_index(size as u64) as usize,
        DispatchMode::Sequential => block % size,
    }
}

fn mask(r: u64) -> u16 {
    r as u16
}

/// Block-level encryption with explicit bit sources.
pub fn encrypt_blocks<P, R, D>(
    perms: &[P],
    prerand: &mut R,
    dispatch: &mut D,
    mode: DispatchMode,
    blocks: &[u16],
) -> Vec<u16>
where
    P: BlockPermutation,
    R: BitSource + ?Sized,
    D: BitSource + ?Sized,
{
    let bits = perms[0].block_bits();
    blocks
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let r = mask(prerand.next_bits(bits));
            let i = select(dispatch, mode, k, perms.len());
            perms[i].forward(m ^ r)
        })
        .collect()
}

/// Inverse of [`encrypt_blocks`] given sources in the same state.
pub fn decrypt_blocks<P, R, D>(
    perms: &[P],
    prerand: &mut R,
    dispatch: &mut D,
    mode: DispatchMode,
    blocks: &[u16],
) -> Vec<u16>
where
    P: BlockPermutation,
    R: BitSource + ?Sized,
    D: BitSource + ?Sized,
{
    let bits = perms[0].block_bits();
    blocks
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let r = mask(prerand.next_bits(bits));
            let i = select(dispatch, mode, k, perms.len());
            perms[i].backward(c) ^ r
        })
        .collect()
}

/// Splits bytes into `bits`-wide blocks, most significant bit first. The
/// total bit length must be a multiple of `bits`.
pub fn pack_blocks(bytes: &[u8], bits: u32) -> Result<Vec<u16>> {
    check_bits(bits)?;
    let total = bytes.len() as u64 * 8;
    if !total.is_multiple_of(u64::from(bits)) {
        return Err(Error::format(
            bytes.len(),
            format!("{total} bits is not a multiple of the {bits}-bit block width"),
        ));
    }
    if bits == 8 {
        return Ok(bytes.iter().map(|&b| u16::from(b)).collect());
    }
    let mut out = Vec::with_capacity((total / u64::from(bits)) as usize);
    let mut acc = 0u32;
    let mut have = 0u32;
    for &b in bytes {
        acc = (acc << 8) | u32::from(b);
        have += 8;
        while have >= bits {
            have -= bits;
            out.push(((acc >> have) & ((1 << bits) - 1)) as u16);
        }
        acc &= (1 << have) - 1;
    }
    Ok(out)
}

/// Inverse of [`pack_blocks`].
pub fn unpack_blocks(blocks: &[u16], bits: u32) -> Vec<u8> {
    if bits == 8 {
        return blocks.iter().map(|&b| b as u8).collect();
    }
    let mut out = Vec::with_capacity(blocks.len() * bits as usize / 8);
    let mut acc = 0u32;
    let mut have = 0u32;
    for &blk in blocks {
        acc = (acc << bits) | u32::from(blk);
        have += bits;
        while have >= 8 {
            have -= 8;
            out.push((acc >> have) as u8);
        }
        acc &= (1 << have) - 1;
    }
    out
}

pub fn encrypt_stream_with_mode(
    pad: &PermutationPad,
    seed: &[u8],
    plaintext: &[u8],
    mode: DispatchMode,
) -> Result<Vec<u8>> {
    let blocks = pack_blocks(plaintext, pad.bits)?;
    let mut prerand = Keystream::new(seed, TAG_PRERAND);
    let mut dispatch = Keystream::new(seed, TAG_DISPATCH);
    let out = encrypt_blocks(&pad.perms, &mut prerand, &mut dispatch, mode, &blocks);
    Ok(unpack_blocks(&out, pad.bits))
}

pub fn decrypt_stream_with_mode(
    pad: &PermutationPad,
    seed: &[u8],
    ciphertext: &[u8],
    mode: DispatchMode,
) -> Result<Vec<u8>> {
    let blocks = pack_blocks(ciphertext, pad.bits)?;
    let mut prerand = Keystream::new(seed, TAG_PRERAND);
    let mut dispatch = Keystream::new(seed, TAG_DISPATCH);
    let out = decrypt_blocks(&pad.perms, &mut prerand, &mut dispatch, mode, &blocks);
    Ok(unpack_blocks(&out, pad.bits))
}

/// Encrypts with random dispatch. The plaintext bit length must be a
/// multiple of the block width; the ciphertext has the same length.
pub fn encrypt_stream(pad: &PermutationPad, seed: &[u8], plaintext: &[u8]) -> Result<Vec<u8>> {
    encrypt_stream_with_mode(pad, seed, plaintext, DispatchMode::Random)
}

pub fn decrypt_stream(pad: &PermutationPad, seed: &[u8], ciphertext: &[u8]) -> Result<Vec<u8>> {
    decrypt_stream_with_mode(pad, seed, ciphertext, DispatchMode::Random)
}

/// `x -> (R x + A) mod 2^n` with odd `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AffinePermutation {
    bits: u32,
    multiplier: u32,
    offset: u32,
    inverse_multiplier: u32,
}

impl AffinePermutation {
    pub fn new(bits: u32, multiplier: u32, offset: u32) -> Result<Self> {
        check_bits(bits)?;
        let size = 1u32 << bits;
        if multiplier.is_multiple_of(2) || multiplier >= size {
            return Err(Error::param("affine multiplier must be odd and below 2^n"));
        }
        if offset >= size {
            return Err(Error::param("affine offset must be below 2^n"));
        }
        // Newton iteration doubles the number of correct low bits each step.
        let mut inv = multiplier;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(multiplier.wrapping_mul(inv)));
        }
        Ok(AffinePermutation {
            bits,
            multiplier,
            offset,
            inverse_multiplier: inv & (size - 1),
        })
    }

    /// Uniform over the `2^(n-1) * 2^n` affine maps.
    pub fn random<S: BitSource + ?Sized>(source: &mut S, bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let multiplier = ((source.next_bits(bits - 1) as u32) << 1) | 1;
        let offset = source.next_bits(bits) as u32;
        Self::new(bits, multiplier, offset)
    }

    fn size_mask(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn apply(&self, m: u16) -> Result<u16> {
        if u32::from(m) > self.size_mask() {
            return Err(Error::param("block exceeds the affine width"));
        }
        Ok(self.forward(m))
    }

    pub fn invert(&self, c: u16) -> Result<u16> {
        if u32::from(c) > self.size_mask() {
            return Err(Error::param("block exceeds the affine width"));
        }
        Ok(self.backward(c))
    }

    pub fn to_permutation(&self) -> Permutation {
        let table = (0..=self.size_mask())
            .map(|m| self.forward(m as u16))
            .collect();
        Permutation::from_table(self.bits, table).expect("odd multiplier gives a bijection")
    }
}

impl BlockPermutation for AffinePermutation {
    fn block_bits(&self) -> u32 {
        self.bits
    }

    fn forward(&self, m: u16) -> u16 {
        (self
            .multiplier
            .wrapping_mul(u32::from(m))
            .wrapping_add(self.offset)
            & self.size_mask()) as u16
    }

    fn backward(&self, c: u16) -> u16 {
        let shifted = u32::from(c).wrapping_sub(self.offset);
        (self.inverse_multiplier.wrapping_mul(shifted) & self.size_mask()) as u16
    }
}

/// Pad of affine permutations, drawn from the `QPP-pad` stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffinePad {
    maps: Vec<AffinePermutation>,
}

impl AffinePad {
    pub fn generate(seed: &[u8], bits: u32, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::param("pad size must be at least 1"));
        }
        let mut ks = Keystream::new(seed, TAG_PAD);
        let maps = (0..size)
            .map(|_| AffinePermutation::random(&mut ks, bits))
            .collect::<Result<Vec<_>>>()?;
        Ok(AffinePad { maps })
    }

    pub fn maps(&self) -> &[AffinePermutation] {
        &self.maps
    }

    pub fn encrypt(&self, seed: &[u8], plaintext: &[u8], mode: DispatchMode) -> Result<Vec<u8>> {
        let bits = self.maps[0].bits;
        let blocks = pack_blocks(plaintext, bits)?;
        let mut prerand = Keystream::new(seed, TAG_PRERAND);
        let mut dispatch = Keystream::new(seed, TAG_DISPATCH);
        let out = encrypt_blocks(&self.maps, &mut prerand, &mut dispatch, mode, &blocks);
        Ok(unpack_blocks(&out, bits))
    }

    pub fn decrypt(&self, seed: &[u8], ciphertext: &[u8], mode: DispatchMode) -> Result<Vec<u8>> {
        let bits = self.maps[0].bits;
        let blocks = pack_blocks(ciphertext, bits)?;
        let mut prerand = Keystream::new(seed, TAG_PRERAND);
        let mut dispatch = Keystream::new(seed, TAG_DISPATCH);
        let out = decrypt_blocks(&self.maps, &mut prerand, &mut dispatch, mode, &blocks);
        Ok(unpack_blocks(&out, bits))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PadKind {
    /// Uniformly random permutation matrices.
    Matrix,
    /// Affine maps `(R x + A) mod 2^n`.
    Arithmetic,
}

/// Key-space entropy of a pad in bits: `M * log2((2^n)!)` for matrix pads,
/// `M * log2(phi(2^n) * 2^n) = M * (2n - 1)` for arithmetic pads.
pub fn pad_entropy(bits: u32, size: usize, kind: PadKind) -> Result<f64> {
    check_bits(bits)?;
    let per_perm = match kind {
        PadKind::Matrix => (2..=1u64 << bits).map(|k| (k as f64).log2()).sum::<f64>(),
        PadKind::Arithmetic => f64::from(2 * bits - 1),
    };
    Ok(size as f64 * per_perm)
}
