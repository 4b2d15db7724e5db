//! Known-answer test files.
//!
//! A file is a sequence of vectors separated by blank lines. Each vector is a
//! block of `name = lowercase-hex` lines (`params` and `count` are plain
//! text). Lines starting with `#` are comments.
//!
//! Every vector carries its own 32-byte seed. Key generation, encapsulation
//! and signing all draw from `Keystream(seed, "HPPK-u")` in that order, so a
//! vector can be regenerated from its seed and message alone.

use std::fmt;

use crate::codec::{self, Object};
use crate::error::{Error, Result};
use crate::hppk_ds::{ds_keygen, sign, verify};
use crate::hppk_kem::{decapsulate, encapsulate};
use crate::keystream::{Keystream, TAG_HPPK_ENTROPY};
use crate::params::{HppkParams, ParamSet};
use rand_core::RngCore;

/// Field order within a vector.
pub const FIELDS: [&str; 10] = [
    "params", "count", "seed", "pk", "sk", "vk", "ct", "ss", "msg", "sig",
];

const VECTOR_SEED_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatVector {
    pub set: ParamSet,
    pub count: usize,
    pub seed: Vec<u8>,
    pub pk: Vec<u8>,
    pub sk: Vec<u8>,
    pub vk: Vec<u8>,
    pub ct: Vec<u8>,
    pub ss: Vec<u8>,
    pub msg: Vec<u8>,
    pub sig: Vec<u8>,
}

impl KatVector {
    /// Runs the full lifecycle from a vector seed and message.
    pub fn generate(set: ParamSet, count: usize, seed: &[u8], msg: &[u8]) -> Result<Self> {
        let params = set.params();
        let mut rng = Keystream::new(seed, TAG_HPPK_ENTROPY);
        let triple = ds_keygen(&params, &mut rng)?;
        let (x, ct) = encapsulate(&triple.pk, &params, &mut rng)?;
        let sig = sign(&triple.sk, &triple.vk, &params, msg, &mut rng)?;
        let enc = |o: Object| codec::encode(&o);
        Ok(KatVector {
            set,
            count,
            seed: seed.to_vec(),
            pk: enc(Object::KemPublicKey(params.clone(), triple.pk))?,
            sk: enc(Object::KemPrivateKey(params.clone(), triple.sk))?,
            vk: enc(Object::DsVerificationKey(params.clone(), triple.vk))?,
            ct: enc(Object::KemCiphertext(params.clone(), ct))?,
            ss: codec::encode_shared_secret(&params, &x)?,
            msg: msg.to_vec(),
            sig: enc(Object::DsSignature(params, sig))?,
        })
    }

    fn field(&self, name: &str) -> &[u8] {
        match name {
            "seed" => &self.seed,
            "pk" => &self.pk,
            "sk" => &self.sk,
            "vk" => &self.vk,
            "ct" => &self.ct,
            "ss" => &self.ss,
            "msg" => &self.msg,
            "sig" => &self.sig,
            _ => unreachable!("not a byte field: {name}"),
        }
    }

    fn write(&self, out: &mut String) {
        use std::fmt::Write;
        let _ = writeln!(out, "params = {}", self.set);
        let _ = writeln!(out, "count = {}", self.count);
        for name in &FIELDS[2..] {
            let _ = writeln!(out, "{name} = {}", hex::encode(self.field(name)));
        }
    }
}

/// Vectors for `set`, with seeds and messages drawn from a stream keyed by
/// the master seed and the set name. Message `i` is `33 * (i + 1)` bytes.
pub fn generate_vectors(seed: &[u8], set: ParamSet, count: usize) -> Result<Vec<KatVector>> {
    let mut master_seed = seed.to_vec();
    master_seed.extend_from_slice(set.to_string().as_bytes());
    let mut master = Keystream::new(&master_seed, TAG_HPPK_ENTROPY);
    (0..count)
        .map(|i| {
            let mut vseed = [0u8; VECTOR_SEED_LEN];
            master.fill_bytes(&mut vseed);
            let mut msg = vec![0u8; 33 * (i + 1)];
            master.fill_bytes(&mut msg);
            KatVector::generate(set, i, &vseed, &msg)
        })
        .collect()
}

/// Renders a KAT file for every set in `sets`.
pub fn emit_kat(seed: &[u8], sets: &[ParamSet], count: usize) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# master seed {}\n\n", hex::encode(seed)));
    let mut first = true;
    for &set in sets {
        for v in generate_vectors(seed, set, count)? {
            if !first {
                out.push('\n');
            }
            first = false;
            v.write(&mut out);
        }
    }
    Ok(out)
}

/// Where a check went wrong. `offset` is a byte offset inside the field's
/// decoded value, when one applies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatFailure {
    pub set: Option<ParamSet>,
    pub vector: Option<usize>,
    pub line: Option<usize>,
    pub field: String,
    pub offset: Option<usize>,
    pub reason: String,
}

impl fmt::Display for KatFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.vector, self.set) {
            (Some(v), Some(set)) => write!(f, "vector {v} of {set}: ")?,
            (Some(v), None) => write!(f, "vector {v}: ")?,
            _ => {}
        }
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        write!(f, "field {}", self.field)?;
        if let Some(o) = self.offset {
            write!(f, " at byte {o}")?;
        }
        write!(f, ": {}", self.reason)
    }
}

impl std::error::Error for KatFailure {}

fn parse_failure(line: usize, field: &str, reason: impl Into<String>) -> KatFailure {
    KatFailure {
        set: None,
        vector: None,
        line: Some(line),
        field: field.to_string(),
        offset: None,
        reason: reason.into(),
    }
}

/// Parses a KAT file without re-running anything.
pub fn parse_kat(text: &str) -> std::result::Result<Vec<KatVector>, KatFailure> {
    let mut vectors = Vec::new();
    let mut block: Vec<(usize, &str, &str)> = Vec::new();
    let lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    for (no, line) in lines.chain(std::iter::once((0, ""))) {
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !block.is_empty() {
                vectors.push(parse_block(&block)?);
                block.clear();
            }
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_failure(no, "?", "expected `name = value`"))?;
        block.push((no, k.trim(), v.trim()));
    }
    Ok(vectors)
}

fn parse_block(block: &[(usize, &str, &str)]) -> std::result::Result<KatVector, KatFailure> {
    if block.len() != FIELDS.len() {
        return Err(parse_failure(
            block[0].0,
            block[0].1,
            format!(
                "vector has {} fields, expected {}",
                block.len(),
                FIELDS.len()
            ),
        ));
    }
    for (&(no, k, _), want) in block.iter().zip(FIELDS) {
        if k != want {
            return Err(parse_failure(no, k, format!("expected field {want}")));
        }
    }
    let (no, _, set) = block[0];
    let set: ParamSet = set
        .parse()
        .map_err(|e: Error| parse_failure(no, "params", e.to_string()))?;
    let (no, _, count) = block[1];
    let count = count
        .parse()
        .map_err(|_| parse_failure(no, "count", "not a decimal integer"))?;
    let mut bytes = Vec::with_capacity(8);
    for &(no, k, v) in &block[2..] {
        bytes.push(hex::decode(v).map_err(|e| parse_failure(no, k, format!("bad hex: {e}")))?);
    }
    let mut it = bytes.into_iter();
    let mut next = || it.next().unwrap();
    Ok(KatVector {
        set,
        count,
        seed: next(),
        pk: next(),
        sk: next(),
        vk: next(),
        ct: next(),
        ss: next(),
        msg: next(),
        sig: next(),
    })
}

fn first_difference(a: &[u8], b: &[u8]) -> usize {
    a.iter()
        .zip(b)
        .position(|(x, y)| x != y)
        .unwrap_or(a.len().min(b.len()))
}

fn check_vector(v: &KatVector) -> std::result::Result<(), KatFailure> {
    let fail = |field: &str, offset: Option<usize>, reason: String| KatFailure {
        set: Some(v.set),
        vector: Some(v.count),
        line: None,
        field: field.to_string(),
        offset,
        reason,
    };
    let fresh = KatVector::generate(v.set, v.count, &v.seed, &v.msg)
        .map_err(|e| fail("seed", None, format!("regeneration failed: {e}")))?;
    for name in ["pk", "sk", "vk", "ct", "ss", "sig"] {
        let (want, got) = (fresh.field(name), v.field(name));
        if want != got {
            let reason = if want.len() != got.len() {
                format!("length {} differs from expected {}", got.len(), want.len())
            } else {
                "value differs from regenerated vector".to_string()
            };
            return Err(fail(name, Some(first_difference(want, got)), reason));
        }
    }
    // The recorded bytes also have to work on their own.
    let params: HppkParams = v.set.params();
    let decoded = |field: &str, bytes: &[u8]| {
        codec::decode(bytes).map_err(|e| fail(field, None, e.to_string()))
    };
    let (Object::KemPrivateKey(_, sk), Object::KemCiphertext(_, ct)) =
        (decoded("sk", &v.sk)?, decoded("ct", &v.ct)?)
    else {
        return Err(fail("sk", None, "unexpected object kind".into()));
    };
    let x = decapsulate(&sk, &ct, &params).map_err(|e| fail("ct", None, e.to_string()))?;
    if codec::encode_shared_secret(&params, &x).ok().as_deref() != Some(&v.ss[..]) {
        return Err(fail("ss", None, "decapsulation disagrees".into()));
    }
    let (Object::DsVerificationKey(_, vk), Object::DsSignature(_, sig)) =
        (decoded("vk", &v.vk)?, decoded("sig", &v.sig)?)
    else {
        return Err(fail("vk", None, "unexpected object kind".into()));
    };
    match verify(&vk, &params, &v.msg, &sig) {
        Ok(true) => Ok(()),
        Ok(false) => Err(fail("sig", None, "signature rejected".into())),
        Err(e) => Err(fail("sig", None, e.to_string())),
    }
}

/// Re-runs every vector in a KAT file. Returns the number of vectors checked
/// or the first divergence.
pub fn check_kat(text: &str) -> std::result::Result<usize, KatFailure> {
    let vectors = parse_kat(text)?;
    if vectors.is_empty() {
        return Err(parse_failure(1, "-", "no vectors found"));
    }
    for v in &vectors {
        check_vector(v)?;
    }
    Ok(vectors.len())
}
