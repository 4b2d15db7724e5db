//! Byte formats for keys, ciphertexts, signatures and permutation pads.
//!
//! Every object is wrapped in an envelope:
//!
//! ```text
//! magic (4) | version (1) | kind (1) | header | payload
//! ```
//!
//! Scheme objects use magic `HPK1` and a 7-byte parameter header
//! `p_bits u16 | n u8 | lambda u8 | m u8 | L u16`. Pad objects use magic
//! `QPP1` and carry their own shape inside the payload. All integers are
//! big-endian and fixed width, so the payload length is a function of the
//! header alone and decoding never guesses.

use crate::error::{Error, Result};
use crate::hidden_ring::RingOperator;
use crate::hppk_ds::{DsVerificationKey, KeyTriple, Signature};
use crate::hppk_kem::{CoeffMatrix, KemCiphertext, KemPrivateKey, KemPublicKey};
use crate::params::HppkParams;
use crate::qpp::{self, DispatchMode, Permutation, PermutationPad};
use crate::ring_arith::WideUint;

pub const MAGIC_HPPK: [u8; 4] = *b"HPK1";
pub const MAGIC_QPP: [u8; 4] = *b"QPP1";
pub const VERSION: u8 = 1;

/// Magic, version and kind.
pub const PREFIX_LEN: usize = 6;
/// Prefix plus the scheme parameter header.
pub const SCHEME_HEADER_LEN: usize = PREFIX_LEN + 7;

pub const QPP_SEED_LEN: usize = 32;
pub const QPP_NONCE_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    QppPad,
    QppKey,
    QppStream,
    KemPublicKey,
    KemPrivateKey,
    KemCiphertext,
    DsVerificationKey,
    DsSignature,
    KeyTriple,
}

impl Kind {
    pub fn to_byte(self) -> u8 {
        match self {
            Kind::QppPad => 0x01,
            Kind::QppKey => 0x02,
            Kind::QppStream => 0x03,
            Kind::KemPublicKey => 0x10,
            Kind::KemPrivateKey => 0x11,
            Kind::KemCiphertext => 0x12,
            Kind::DsVerificationKey => 0x13,
            Kind::DsSignature => 0x14,
            Kind::KeyTriple => 0x15,
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x01 => Kind::QppPad,
            0x02 => Kind::QppKey,
            0x03 => Kind::QppStream,
            0x10 => Kind::KemPublicKey,
            0x11 => Kind::KemPrivateKey,
            0x12 => Kind::KemCiphertext,
            0x13 => Kind::DsVerificationKey,
            0x14 => Kind::DsSignature,
            0x15 => Kind::KeyTriple,
            _ => return None,
        })
    }

    fn magic(self) -> [u8; 4] {
        match self {
            Kind::QppPad | Kind::QppKey | Kind::QppStream => MAGIC_QPP,
            _ => MAGIC_HPPK,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::QppPad => "qpp pad",
            Kind::QppKey => "qpp key",
            Kind::QppStream => "qpp stream",
            Kind::KemPublicKey => "kem public key",
            Kind::KemPrivateKey => "private key",
            Kind::KemCiphertext => "kem ciphertext",
            Kind::DsVerificationKey => "verification key",
            Kind::DsSignature => "signature",
            Kind::KeyTriple => "key triple",
        }
    }
}

/// Symmetric pad key: the pad is regenerated from the seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QppKey {
    pub bits: u32,
    pub size: usize,
    pub seed: [u8; QPP_SEED_LEN],
}

impl QppKey {
    pub fn pad(&self) -> Result<PermutationPad> {
        qpp::generate_pad(&self.seed, self.bits, self.size)
    }

    /// Stream seed for one message: key seed followed by the nonce.
    fn stream_seed(&self, nonce: &[u8; QPP_NONCE_LEN]) -> Vec<u8> {
        let mut s = self.seed.to_vec();
        s.extend_from_slice(nonce);
        s
    }
}

/// Encrypted file body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QppStream {
    pub bits: u32,
    pub size: usize,
    pub mode: DispatchMode,
    pub nonce: [u8; QPP_NONCE_LEN],
    pub plaintext_len: u64,
    pub ciphertext: Vec<u8>,
}

/// Length after padding `len` bytes to a whole number of `bits`-wide blocks.
/// Aligned input is left alone; otherwise a `1` bit and zeros are appended.
pub fn padded_len(len: u64, bits: u32) -> u64 {
    if (len * 8).is_multiple_of(u64::from(bits)) {
        return len;
    }
    let mut padded = len + 1;
    while !(padded * 8).is_multiple_of(u64::from(bits)) {
        padded += 1;
    }
    padded
}

fn pad_message(plaintext: &[u8], bits: u32) -> Vec<u8> {
    let mut out = plaintext.to_vec();
    let target = padded_len(plaintext.len() as u64, bits) as usize;
    if target > out.len() {
        out.push(0x80);
        out.resize(target, 0);
    }
    out
}

/// Encrypts `plaintext` under `key` with a caller-chosen nonce.
pub fn seal_stream(
    key: &QppKey,
    nonce: [u8; QPP_NONCE_LEN],
    mode: DispatchMode,
    plaintext: &[u8],
) -> Result<QppStream> {
    let pad = key.pad()?;
    let body = pad_message(plaintext, key.bits);
    let ciphertext = qpp::encrypt_stream_with_mode(&pad, &key.stream_seed(&nonce), &body, mode)?;
    Ok(QppStream {
        bits: key.bits,
        size: key.size,
        mode,
        nonce,
        plaintext_len: plaintext.len() as u64,
        ciphertext,
    })
}

/// Decrypts and strips padding. Fails if the key shape does not match the
/// stream or the padding is not exactly `1` followed by zeros.
pub fn open_stream(key: &QppKey, stream: &QppStream) -> Result<Vec<u8>> {
    if key.bits != stream.bits || key.size != stream.size {
        return Err(Error::param("key shape does not match the stream"));
    }
    let pad = key.pad()?;
    let mut body = qpp::decrypt_stream_with_mode(
        &pad,
        &key.stream_seed(&stream.nonce),
        &stream.ciphertext,
        stream.mode,
    )?;
    let len = stream.plaintext_len as usize;
    if body.len() > len {
        if body[len] != 0x80 || body[len + 1..].iter().any(|&b| b != 0) {
            return Err(Error::param(
                "padding check failed; wrong key or corrupted stream",
            ));
        }
        body.truncate(len);
    }
    Ok(body)
}

/// Every encodable object.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Object {
    KemPublicKey(HppkParams, KemPublicKey),
    KemPrivateKey(HppkParams, KemPrivateKey),
    KemCiphertext(HppkParams, KemCiphertext),
    DsVerificationKey(HppkParams, DsVerificationKey),
    DsSignature(HppkParams, Signature),
    KeyTriple(HppkParams, KeyTriple),
    QppPad(PermutationPad),
    QppKey(QppKey),
    QppStream(QppStream),
}

impl Object {
    pub fn kind(&self) -> Kind {
        match self {
            Object::KemPublicKey(..) => Kind::KemPublicKey,
            Object::KemPrivateKey(..) => Kind::KemPrivateKey,
            Object::KemCiphertext(..) => Kind::KemCiphertext,
            Object::DsVerificationKey(..) => Kind::DsVerificationKey,
            Object::DsSignature(..) => Kind::DsSignature,
            Object::KeyTriple(..) => Kind::KeyTriple,
            Object::QppPad(_) => Kind::QppPad,
            Object::QppKey(_) => Kind::QppKey,
            Object::QppStream(_) => Kind::QppStream,
        }
    }

    pub fn params(&self) -> Option<&HppkParams> {
        match self {
            Object::KemPublicKey(p, _)
            | Object::KemPrivateKey(p, _)
            | Object::KemCiphertext(p, _)
            | Object::DsVerificationKey(p, _)
            | Object::DsSignature(p, _)
            | Object::KeyTriple(p, _) => Some(p),
            _ => None,
        }
    }
}

// Payload sizes.

pub fn kem_public_key_len(params: &HppkParams) -> usize {
    2 * params.terms() * params.ring_bytes()
}

pub fn kem_private_key_len(params: &HppkParams) -> usize {
    2 * (params.lambda + 1) * params.field_bytes() + 4 * params.ring_bytes()
}

pub fn kem_ciphertext_len(params: &HppkParams) -> usize {
    2 * params.ciphertext_field_bytes()
}

pub fn verification_key_len(params: &HppkParams) -> usize {
    2 + 2 * params.terms() * (params.field_bytes() + params.barrett_bytes())
        + 2 * params.field_bytes()
}

pub fn signature_len(params: &HppkParams) -> usize {
    2 * params.ring_bytes()
}

pub fn key_triple_len(params: &HppkParams) -> usize {
    kem_private_key_len(params) + kem_public_key_len(params) + verification_key_len(params)
}

pub fn shared_secret_len(params: &HppkParams) -> usize {
    params.field_bytes()
}

/// Payload length of a scheme object of `kind`; `None` for pad kinds.
pub fn payload_len(kind: Kind, params: &HppkParams) -> Option<usize> {
    Some(match kind {
        Kind::KemPublicKey => kem_public_key_len(params),
        Kind::KemPrivateKey => kem_private_key_len(params),
        Kind::KemCiphertext => kem_ciphertext_len(params),
        Kind::DsVerificationKey => verification_key_len(params),
        Kind::DsSignature => signature_len(params),
        Kind::KeyTriple => key_triple_len(params),
        Kind::QppPad | Kind::QppKey | Kind::QppStream => return None,
    })
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new(kind: Kind) -> Self {
        let mut buf = kind.magic().to_vec();
        buf.push(VERSION);
        buf.push(kind.to_byte());
        Writer { buf }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    fn uint(&mut self, v: &WideUint, width: usize) -> Result<()> {
        self.buf.extend_from_slice(&v.to_be_bytes(width)?);
        Ok(())
    }

    fn uints<'a>(
        &mut self,
        vs: impl IntoIterator<Item = &'a WideUint>,
        width: usize,
    ) -> Result<()> {
        vs.into_iter().try_for_each(|v| self.uint(v, width))
    }

    fn scheme_header(&mut self, params: &HppkParams) -> Result<()> {
        let narrow = |v: usize| {
            u8::try_from(v).map_err(|_| Error::param("parameter does not fit the header"))
        };
        let p_bits =
            u16::try_from(params.p_bits).map_err(|_| Error::param("field width too large"))?;
        let ring =
            u16::try_from(params.ring_bits).map_err(|_| Error::param("ring width too large"))?;
        self.u16(p_bits);
        self.u8(narrow(params.n)?);
        self.u8(narrow(params.lambda)?);
        self.u8(narrow(params.m)?);
        self.u16(ring);
        Ok(())
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(
                self.pos,
                format!(
                    "truncated: need {n} bytes, {} left",
                    self.buf.len() - self.pos
                ),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Fixed-width integer strictly below `bound`.
    fn uint_below(&mut self, width: usize, bound: &WideUint, what: &str) -> Result<WideUint> {
        let at = self.pos;
        let v = WideUint::from_be_bytes(self.take(width)?)?;
        if &v >= bound {
            return Err(Error::format(at, format!("{what} out of range")));
        }
        Ok(v)
    }

    fn matrix(
        &mut self,
        rows: usize,
        cols: usize,
        width: usize,
        bound: &WideUint,
        what: &str,
    ) -> Result<CoeffMatrix> {
        let entries = (0..rows * cols)
            .map(|_| self.uint_below(width, bound, what))
            .collect::<Result<Vec<_>>>()?;
        CoeffMatrix::new(rows, cols, entries)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(
                self.pos,
                format!("{} trailing bytes", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }
}

/// Maps a validation failure of an already-parsed field to a format error
/// at that field's offset.
fn at(offset: usize) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::Format { .. } => e,
        other => Error::format(offset, other.to_string()),
    }
}

fn write_private_key(w: &mut Writer, params: &HppkParams, sk: &KemPrivateKey) -> Result<()> {
    let fb = params.field_bytes();
    let rb = params.ring_bytes();
    w.uints(sk.f(), fb)?;
    w.uints(sk.h(), fb)?;
    for op in [sk.op1(), sk.op2()] {
        w.uint(op.multiplier(), rb)?;
        w.uint(op.modulus(), rb)?;
    }
    Ok(())
}

fn read_private_key(r: &mut Reader, params: &HppkParams) -> Result<KemPrivateKey> {
    let start = r.pos;
    let fb = params.field_bytes();
    let rb = params.ring_bytes();
    let limit = WideUint::pow2(u64::from(params.ring_bits))?;
    let poly = |r: &mut Reader| -> Result<Vec<WideUint>> {
        (0..=params.lambda)
            .map(|_| r.uint_below(fb, &params.p, "coefficient"))
            .collect()
    };
    let f = poly(r)?;
    let h = poly(r)?;
    let op = |r: &mut Reader| -> Result<RingOperator> {
        let off = r.pos;
        let mult = r.uint_below(rb, &limit, "multiplier")?;
        let modulus = r.uint_below(rb, &limit, "modulus")?;
        RingOperator::new(mult, modulus, params.ring_bits).map_err(at(off))
    };
    let op1 = op(r)?;
    let op2 = op(r)?;
    KemPrivateKey::from_parts(params, f, h, op1, op2).map_err(at(start))
}

fn write_public_key(w: &mut Writer, params: &HppkParams, pk: &KemPublicKey) -> Result<()> {
    let rb = params.ring_bytes();
    w.uints(pk.p_matrix().entries(), rb)?;
    w.uints(pk.q_matrix().entries(), rb)
}

fn read_public_key(r: &mut Reader, params: &HppkParams) -> Result<KemPublicKey> {
    let start = r.pos;
    let limit = WideUint::pow2(u64::from(params.ring_bits))?;
    let rb = params.ring_bytes();
    let p = r.matrix(params.rows(), params.m, rb, &limit, "public coefficient")?;
    let q = r.matrix(params.rows(), params.m, rb, &limit, "public coefficient")?;
    KemPublicKey::from_parts(params, p, q).map_err(at(start))
}

fn write_verification_key(
    w: &mut Writer,
    params: &HppkParams,
    vk: &DsVerificationKey,
) -> Result<()> {
    let fb = params.field_bytes();
    let kb = params.barrett_bytes();
    let k = u16::try_from(vk.barrett_bits).map_err(|_| Error::param("Barrett width too large"))?;
    if vk.barrett_bits != params.barrett_bits {
        return Err(Error::param(
            "verification key does not match the parameters",
        ));
    }
    w.u16(k);
    w.uints(vk.p_prime.entries(), fb)?;
    w.uints(vk.q_prime.entries(), fb)?;
    w.uints(vk.mu.entries(), kb)?;
    w.uints(vk.nu.entries(), kb)?;
    w.uint(&vk.s1, fb)?;
    w.uint(&vk.s2, fb)
}

fn read_verification_key(r: &mut Reader, params: &HppkParams) -> Result<DsVerificationKey> {
    let k_at = r.pos;
    let k = u32::from(r.u16()?);
    if k != params.barrett_bits {
        return Err(Error::format(
            k_at,
            format!("Barrett width {k} does not match {}", params.barrett_bits),
        ));
    }
    let fb = params.field_bytes();
    let kb = params.barrett_bytes();
    let k_limit = WideUint::pow2(u64::from(k))?;
    let (rows, cols) = (params.rows(), params.m);
    let p_prime = r.matrix(rows, cols, fb, &params.p, "field element")?;
    let q_prime = r.matrix(rows, cols, fb, &params.p, "field element")?;
    let mu = r.matrix(rows, cols, kb, &k_limit, "Barrett coefficient")?;
    let nu = r.matrix(rows, cols, kb, &k_limit, "Barrett coefficient")?;
    let s1 = r.uint_below(fb, &params.p, "field element")?;
    let s2 = r.uint_below(fb, &params.p, "field element")?;
    Ok(DsVerificationKey {
        p_prime,
        q_prime,
        mu,
        nu,
        s1,
        s2,
        barrett_bits: k,
    })
}

fn write_pad(w: &mut Writer, pad: &PermutationPad) -> Result<()> {
    let size = u32::try_from(pad.len()).map_err(|_| Error::param("pad too large"))?;
    w.u8(pad.bits() as u8);
    w.u32(size);
    let width = pad.bits().div_ceil(8) as usize;
    for p in pad.permutations() {
        for &v in p.table() {
            w.bytes(&v.to_be_bytes()[2 - width..]);
        }
    }
    Ok(())
}

fn read_shape(r: &mut Reader) -> Result<(u32, usize)> {
    let at = r.pos;
    let bits = u32::from(r.u8()?);
    if !(1..=qpp::MAX_BLOCK_BITS).contains(&bits) {
        return Err(Error::format(at, format!("block width {bits} unsupported")));
    }
    let at = r.pos;
    let size = r.u32()? as usize;
    if size == 0 {
        return Err(Error::format(at, "pad size must be at least 1"));
    }
    Ok((bits, size))
}

fn read_pad(r: &mut Reader) -> Result<PermutationPad> {
    let (bits, size) = read_shape(r)?;
    let width = bits.div_ceil(8) as usize;
    let entries = 1usize << bits;
    // Refuse to allocate for a pad the input cannot hold.
    let need = size.saturating_mul(entries).saturating_mul(width);
    if r.buf.len() - r.pos < need {
        return Err(Error::format(
            r.pos,
            format!("truncated: pad needs {need} bytes"),
        ));
    }
    let mut perms = Vec::with_capacity(size);
    for _ in 0..size {
        let start = r.pos;
        let table = (0..entries)
            .map(|_| {
                let b = r.take(width)?;
                Ok(b.iter().fold(0u16, |acc, &x| (acc << 8) | u16::from(x)))
            })
            .collect::<Result<Vec<_>>>()?;
        perms.push(Permutation::from_table(bits, table).map_err(at(start))?);
    }
    PermutationPad::new(perms)
}

fn write_scheme(w: &mut Writer, obj: &Object) -> Result<()> {
    match obj {
        Object::KemPublicKey(p, pk) => write_public_key(w, p, pk),
        Object::KemPrivateKey(p, sk) => write_private_key(w, p, sk),
        Object::KemCiphertext(p, ct) => {
            let cb = p.ciphertext_field_bytes();
            w.uint(&ct.p_bar, cb)?;
            w.uint(&ct.q_bar, cb)
        }
        Object::DsVerificationKey(p, vk) => write_verification_key(w, p, vk),
        Object::DsSignature(p, sig) => {
            w.uint(sig.f_part(), p.ring_bytes())?;
            w.uint(sig.h_part(), p.ring_bytes())
        }
        Object::KeyTriple(p, t) => {
            write_private_key(w, p, &t.sk)?;
            write_public_key(w, p, &t.pk)?;
            write_verification_key(w, p, &t.vk)
        }
        _ => unreachable!("pad objects are written separately"),
    }
}

/// Canonical encoding of `obj`.
pub fn encode(obj: &Object) -> Result<Vec<u8>> {
    let mut w = Writer::new(obj.kind());
    match obj {
        Object::QppPad(pad) => write_pad(&mut w, pad)?,
        Object::QppKey(key) => {
            w.u8(key.bits as u8);
            w.u32(u32::try_from(key.size).map_err(|_| Error::param("pad too large"))?);
            w.bytes(&key.seed);
        }
        Object::QppStream(s) => {
            w.u8(s.bits as u8);
            w.u32(u32::try_from(s.size).map_err(|_| Error::param("pad too large"))?);
            w.u8(s.mode.to_byte());
            w.bytes(&s.nonce);
            w.u64(s.plaintext_len);
            if s.ciphertext.len() as u64 != padded_len(s.plaintext_len, s.bits) {
                return Err(Error::param(
                    "ciphertext length does not match the plaintext length",
                ));
            }
            w.bytes(&s.ciphertext);
        }
        _ => {
            let params = obj.params().expect("scheme object");
            w.scheme_header(params)?;
            let start = w.buf.len();
            write_scheme(&mut w, obj)?;
            debug_assert_eq!(Some(w.buf.len() - start), payload_len(obj.kind(), params));
        }
    }
    Ok(w.buf)
}

/// Reads the kind without decoding the payload.
pub fn peek_kind(bytes: &[u8]) -> Result<Kind> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC_HPPK && magic != MAGIC_QPP {
        return Err(Error::format(0, "bad magic"));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let kind = Kind::from_byte(r.u8()?).ok_or_else(|| Error::format(5, "unknown kind"))?;
    if kind.magic() != magic {
        return Err(Error::format(5, "kind does not belong to this magic"));
    }
    Ok(kind)
}

fn read_scheme_header(r: &mut Reader) -> Result<HppkParams> {
    let start = r.pos;
    let p_bits = u32::from(r.u16()?);
    let n = usize::from(r.u8()?);
    let lambda = usize::from(r.u8()?);
    let m = usize::from(r.u8()?);
    let ring_bits = u32::from(r.u16()?);
    if !(2..=128).contains(&p_bits) || ring_bits > 512 {
        return Err(Error::format(start, "parameter header out of range"));
    }
    HppkParams::from_header(p_bits, n, lambda, m, ring_bits).map_err(at(start))
}

/// Strict inverse of [`encode`]: rejects anything `encode` cannot produce.
pub fn decode(bytes: &[u8]) -> Result<Object> {
    let kind = peek_kind(bytes)?;
    let mut r = Reader {
        buf: bytes,
        pos: PREFIX_LEN,
    };
    let obj = match kind {
        Kind::QppPad => Object::QppPad(read_pad(&mut r)?),
        Kind::QppKey => {
            let (bits, size) = read_shape(&mut r)?;
            let seed = r.take(QPP_SEED_LEN)?.try_into().unwrap();
            Object::QppKey(QppKey { bits, size, seed })
        }
        Kind::QppStream => {
            let (bits, size) = read_shape(&mut r)?;
            let mode_at = r.pos;
            let mode = DispatchMode::from_byte(r.u8()?)
                .ok_or_else(|| Error::format(mode_at, "unknown dispatch mode"))?;
            let nonce = r.take(QPP_NONCE_LEN)?.try_into().unwrap();
            let len_at = r.pos;
            let plaintext_len = r.u64()?;
            let body = padded_len(plaintext_len, bits);
            if body != (r.buf.len() - r.pos) as u64 {
                return Err(Error::format(
                    len_at,
                    format!("declared length {plaintext_len} needs a {body}-byte body"),
                ));
            }
            let ciphertext = r.take(body as usize)?.to_vec();
            Object::QppStream(QppStream {
                bits,
                size,
                mode,
                nonce,
                plaintext_len,
                ciphertext,
            })
        }
        _ => {
            let params = read_scheme_header(&mut r)?;
            let need = payload_len(kind, &params).expect("scheme kind");
            if r.buf.len() - r.pos < need {
                return Err(Error::format(
                    r.pos,
                    format!(
                        "payload needs {need} bytes, {} present",
                        r.buf.len() - r.pos
                    ),
                ));
            }
            match kind {
                Kind::KemPublicKey => {
                    let pk = read_public_key(&mut r, &params)?;
                    Object::KemPublicKey(params, pk)
                }
                Kind::KemPrivateKey => {
                    let sk = read_private_key(&mut r, &params)?;
                    Object::KemPrivateKey(params, sk)
                }
                Kind::KemCiphertext => {
                    let cb = params.ciphertext_field_bytes();
                    let limit = WideUint::pow2(u64::from(params.ciphertext_bits()))?;
                    let p_bar = r.uint_below(cb, &limit, "ciphertext component")?;
                    let q_bar = r.uint_below(cb, &limit, "ciphertext component")?;
                    Object::KemCiphertext(params, KemCiphertext { p_bar, q_bar })
                }
                Kind::DsVerificationKey => {
                    let vk = read_verification_key(&mut r, &params)?;
                    Object::DsVerificationKey(params, vk)
                }
                Kind::DsSignature => {
                    let start = r.pos;
                    let limit = WideUint::pow2(u64::from(params.ring_bits))?;
                    let f = r.uint_below(params.ring_bytes(), &limit, "signature component")?;
                    let h = r.uint_below(params.ring_bytes(), &limit, "signature component")?;
                    Object::DsSignature(params, Signature::new(f, h).map_err(at(start))?)
                }
                Kind::KeyTriple => {
                    let sk = read_private_key(&mut r, &params)?;
                    let pk = read_public_key(&mut r, &params)?;
                    let vk = read_verification_key(&mut r, &params)?;
                    Object::KeyTriple(params, KeyTriple { sk, pk, vk })
                }
                _ => unreachable!(),
            }
        }
    };
    r.finish()?;
    Ok(obj)
}

/// Decodes and checks that the object has the expected kind.
pub fn decode_kind(bytes: &[u8], expected: Kind) -> Result<Object> {
    let kind = peek_kind(bytes)?;
    if kind != expected {
        return Err(Error::format(
            5,
            format!("expected a {}, found a {}", expected.name(), kind.name()),
        ));
    }
    decode(bytes)
}

/// Shared secret as a bare fixed-width field element.
pub fn encode_shared_secret(params: &HppkParams, x: &WideUint) -> Result<Vec<u8>> {
    if x >= &params.p {
        return Err(Error::param("shared secret outside F_p"));
    }
    x.to_be_bytes(shared_secret_len(params))
}

pub fn decode_shared_secret(params: &HppkParams, bytes: &[u8]) -> Result<WideUint> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let x = r.uint_below(shared_secret_len(params), &params.p, "shared secret")?;
    r.finish()?;
    Ok(x)
}
