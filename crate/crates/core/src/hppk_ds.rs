//! HPPK signatures.
//!
//! The signer publishes `F = R2^-1 (a f(x) mod p) mod S2` and
//! `H = R1^-1 (a h(x) mod p) mod S1` for the message hash `x` and a random
//! nonce `a`. Then `F Q_ij mod S2 = a f(x) q_ij` and `H P_ij mod S1 = a h(x) p_ij`
//! exactly, and the plain identity `f(x) h(x) B(x, u) = h(x) f(x) B(x, u)` gives
//! the verification equation. The verifier cannot reduce modulo the hidden
//! `S1`, `S2`; instead the verification key carries Barrett data
//! (`mu_ij = floor(2^K P_ij / S1)` and friends) scaled by a secret `beta`, so
//! that `beta (F Q_ij mod S2) mod p = F q'_ij - s2 floor(F nu_ij / 2^K) mod p`.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::hppk_kem::{keygen, CoeffMatrix, KemPrivateKey, KemPublicKey};
use crate::keystream::hash_to_field;
use crate::params::DsParams;
use crate::ring_arith::{barrett_mu, barrett_quotient, BarrettContext, WideUint};

const MAX_SIGNING_ATTEMPTS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    f_part: WideUint,
    h_part: WideUint,
}

impl Signature {
    /// Both components must be nonzero: `F = H = 0` satisfies the
    /// verification equation for every message.
    pub fn new(f_part: WideUint, h_part: WideUint) -> Result<Self> {
        if f_part.is_zero() || h_part.is_zero() {
            return Err(Error::param("signature components must be nonzero"));
        }
        Ok(Signature { f_part, h_part })
    }

    /// `F`, reduced modulo `S2`.
    pub fn f_part(&self) -> &WideUint {
        &self.f_part
    }

    /// `H`, reduced modulo `S1`.
    pub fn h_part(&self) -> &WideUint {
        &self.h_part
    }
}

/// Public verification data. Holds no hidden modulus or multiplier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsVerificationKey {
    /// `beta P_ij mod p`.
    pub p_prime: CoeffMatrix,
    /// `beta Q_ij mod p`.
    pub q_prime: CoeffMatrix,
    /// `floor(2^K P_ij / S1)`.
    pub mu: CoeffMatrix,
    /// `floor(2^K Q_ij / S2)`.
    pub nu: CoeffMatrix,
    /// `beta S1 mod p`.
    pub s1: WideUint,
    /// `beta S2 mod p`.
    pub s2: WideUint,
    pub barrett_bits: u32,
}

/// One private key serving both decapsulation and signing, with its
/// encapsulation and verification public keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyTriple {
    pub sk: KemPrivateKey,
    pub pk: KemPublicKey,
    pub vk: DsVerificationKey,
}

pub fn ds_keygen<R: RngCore + ?Sized>(params: &DsParams, rng: &mut R) -> Result<KeyTriple> {
    let (sk, pk) = keygen(params, rng)?;
    let beta = params.field().random_nonzero(rng)?;
    let vk = derive_verification_key(&sk, &pk, params, &beta)?;
    Ok(KeyTriple { sk, pk, vk })
}

/// Builds the verification key for a given `beta`.
pub fn derive_verification_key(
    sk: &KemPrivateKey,
    pk: &KemPublicKey,
    params: &DsParams,
    beta: &WideUint,
) -> Result<DsVerificationKey> {
    let field = params.field();
    if beta.is_zero() || !field.contains(beta) {
        return Err(Error::param("beta must be a nonzero field element"));
    }
    let k = u64::from(params.barrett_bits);
    let ctx1 = BarrettContext::new(sk.op1().modulus().clone(), k)?;
    let ctx2 = BarrettContext::new(sk.op2().modulus().clone(), k)?;
    let scale = |m: &CoeffMatrix| -> CoeffMatrix {
        CoeffMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            field.mul(beta, &field.reduce(m.get(i, j)))
        })
    };
    let barrett = |m: &CoeffMatrix, ctx: &BarrettContext| -> Result<CoeffMatrix> {
        let entries = m
            .entries()
            .iter()
            .map(|e| barrett_mu(e, ctx))
            .collect::<Result<Vec<_>>>()?;
        CoeffMatrix::new(m.rows(), m.cols(), entries)
    };
    Ok(DsVerificationKey {
        p_prime: scale(pk.p_matrix()),
        q_prime: scale(pk.q_matrix()),
        mu: barrett(pk.p_matrix(), &ctx1)?,
        nu: barrett(pk.q_matrix(), &ctx2)?,
        s1: field.mul(beta, &field.reduce(sk.op1().modulus())),
        s2: field.mul(beta, &field.reduce(sk.op2().modulus())),
        barrett_bits: params.barrett_bits,
    })
}

/// Signs `x` with a fixed nonce `alpha`, without the self-check.
pub fn sign_hash_with_nonce(
    sk: &KemPrivateKey,
    params: &DsParams,
    x: &WideUint,
    alpha: &WideUint,
) -> Result<Signature> {
    let field = params.field();
    if alpha.is_zero() || !field.contains(alpha) {
        return Err(Error::param("nonce must be a nonzero field element"));
    }
    let fx = field.eval(sk.f(), x);
    let hx = field.eval(sk.h(), x);
    if fx.is_zero() || hx.is_zero() {
        return Err(Error::DegenerateHash);
    }
    let f_bar = field.mul(alpha, &fx);
    let h_bar = field.mul(alpha, &hx);
    Signature::new(sk.op2().invert(&f_bar)?, sk.op1().invert(&h_bar)?)
}

/// Signs a message. Every candidate signature is checked against `vk` before
/// release; a nonce whose Barrett estimate falls one off is replaced.
pub fn sign<R: RngCore + ?Sized>(
    sk: &KemPrivateKey,
    vk: &DsVerificationKey,
    params: &DsParams,
    message: &[u8],
    rng: &mut R,
) -> Result<Signature> {
    let x = hash_to_field(message, &params.p, params.digest_bytes)?;
    let field = params.field();
    if field.eval(sk.f(), &x).is_zero() || field.eval(sk.h(), &x).is_zero() {
        return Err(Error::DegenerateHash);
    }
    for _ in 0..MAX_SIGNING_ATTEMPTS {
        let alpha = field.random_nonzero(rng)?;
        let sig = sign_hash_with_nonce(sk, params, &x, &alpha)?;
        if verify_hash(vk, params, &x, &sig)? {
            return Ok(sig);
        }
    }
    Err(Error::Signing(
        "no nonce produced a verifiable signature".into(),
    ))
}

/// `(value * prime_entry - s * floor(value * barrett_entry / 2^K)) mod p`.
fn barrett_coefficient(
    field: &PrimeField,
    value: &WideUint,
    prime_entry: &WideUint,
    barrett_entry: &WideUint,
    s: &WideUint,
    k: u32,
) -> Result<WideUint> {
    let q = barrett_quotient(value, barrett_entry, u64::from(k))?;
    Ok(field.sub(&field.mul(value, prime_entry), &field.mul(s, &q)))
}

fn check_shapes(vk: &DsVerificationKey, params: &DsParams, sig: &Signature) -> Result<()> {
    let field = params.field();
    let shape_ok = [&vk.p_prime, &vk.q_prime, &vk.mu, &vk.nu]
        .iter()
        .all(|m| m.rows() == params.rows() && m.cols() == params.m);
    if !shape_ok {
        return Err(Error::param(
            "verification key shape does not match parameters",
        ));
    }
    if vk.barrett_bits < params.ring_bits {
        return Err(Error::param(
            "verification key radix narrower than the ring",
        ));
    }
    let field_ok = vk
        .p_prime
        .entries()
        .iter()
        .chain(vk.q_prime.entries())
        .chain([&vk.s1, &vk.s2])
        .all(|e| field.contains(e));
    if !field_ok {
        return Err(Error::param("verification key field entry outside F_p"));
    }
    let radix = WideUint::pow2(u64::from(vk.barrett_bits))?;
    if vk
        .mu
        .entries()
        .iter()
        .chain(vk.nu.entries())
        .any(|e| e >= &radix)
    {
        return Err(Error::param("Barrett entry exceeds 2^K"));
    }
    let ring = WideUint::pow2(u64::from(params.ring_bits))?;
    if sig.f_part >= ring || sig.h_part >= ring || sig.f_part.is_zero() || sig.h_part.is_zero() {
        return Err(Error::param("signature component out of range"));
    }
    Ok(())
}

/// The verifier's coefficient matrices `(V, U)`:
/// `V_ij = F q'_ij - s2 floor(F nu_ij / 2^K) mod p` and
/// `U_ij = H p'_ij - s1 floor(H mu_ij / 2^K) mod p`.
pub fn verification_matrices(
    vk: &DsVerificationKey,
    params: &DsParams,
    sig: &Signature,
) -> Result<(CoeffMatrix, CoeffMatrix)> {
    check_shapes(vk, params, sig)?;
    let field = params.field();
    let build = |value: &WideUint, primes: &CoeffMatrix, barrett: &CoeffMatrix, s: &WideUint| {
        let entries = primes
            .entries()
            .iter()
            .zip(barrett.entries())
            .map(|(pe, be)| barrett_coefficient(&field, value, pe, be, s, vk.barrett_bits))
            .collect::<Result<Vec<_>>>()?;
        CoeffMatrix::new(primes.rows(), primes.cols(), entries)
    };
    let v = build(&sig.f_part, &vk.q_prime, &vk.nu, &vk.s2)?;
    let u = build(&sig.h_part, &vk.p_prime, &vk.mu, &vk.s1)?;
    Ok((v, u))
}

/// Checks the signature against a precomputed hash value. For each noise
/// column `j`: `sum_i V_ij x^i = sum_i U_ij x^i (mod p)`.
pub fn verify_hash(
    vk: &DsVerificationKey,
    params: &DsParams,
    x: &WideUint,
    sig: &Signature,
) -> Result<bool> {
    let (v, u) = verification_matrices(vk, params, sig)?;
    let field = params.field();
    let x = field.reduce(x);
    Ok((0..params.m).all(|j| {
        let lhs: Vec<WideUint> = v.column(j).cloned().collect();
        let rhs: Vec<WideUint> = u.column(j).cloned().collect();
        field.eval(&lhs, &x) == field.eval(&rhs, &x)
    }))
}

/// `Ok(true)` accepts, `Ok(false)` is a cryptographic reject, `Err` means the
/// inputs were malformed.
pub fn verify(
    vk: &DsVerificationKey,
    params: &DsParams,
    message: &[u8],
    sig: &Signature,
) -> Result<bool> {
    let x = hash_to_field(message, &params.p, params.digest_bytes)?;
    verify_hash(vk, params, &x, sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hidden_ring::RingOperator;
    use crate::hppk_kem::{keypair_from_parts, polynomial_product};
    use crate::params::{HppkParams, ParamSet};
    use crate::ring_arith::mul_mod;
    use rand_chacha::ChaCha20Rng;
    use rand_core::SeedableRng;

    fn w(v: u64) -> WideUint {
        WideUint::from(v)
    }

    fn ws(v: &[u64]) -> Vec<WideUint> {
        v.iter().map(|&x| w(x)).collect()
    }

    fn toy() -> (DsParams, CoeffMatrix, KeyTriple) {
        let params = HppkParams::with_ring_bits(3, 1, 1, 1, 8).unwrap();
        let base = CoeffMatrix::new(2, 1, ws(&[4, 2])).unwrap();
        let op1 = RingOperator::new(w(37), w(229), 8).unwrap();
        let op2 = RingOperator::new(w(91), w(173), 8).unwrap();
        let (sk, pk) =
            keypair_from_parts(&params, ws(&[3, 5]), ws(&[6, 2]), &base, op1, op2).unwrap();
        let vk = derive_verification_key(&sk, &pk, &params, &w(3)).unwrap();
        (params, base, KeyTriple { sk, pk, vk })
    }

    #[test]
    fn unit_beta_reduces_public_matrix() {
        let params = ParamSet::Ds64.params();
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let (sk, pk) = keygen(&params, &mut rng).unwrap();
        let vk = derive_verification_key(&sk, &pk, &params, &w(1)).unwrap();
        let field = params.field();
        for (a, b) in vk.p_prime.entries().iter().zip(pk.p_matrix().entries()) {
            assert_eq!(a, &field.reduce(b));
        }
        assert_eq!(vk.s1, field.reduce(sk.op1().modulus()));
        assert_eq!((vk.mu.rows(), vk.mu.cols()), (3, 1));
        assert_eq!(vk.barrett_bits, 168);
    }

    #[test]
    fn toy_mu_matches_long_division() {
        let (params, _, triple) = toy();
        assert_eq!(params.barrett_bits, 40);
        let s1 = triple.sk.op1().modulus().to_u64().unwrap() as u128;
        for (i, mu) in triple.vk.mu.entries().iter().enumerate() {
            let p_ij = triple.pk.p_matrix().entries()[i].to_u64().unwrap() as u128;
            assert_eq!(mu.to_u128().unwrap(), (p_ij << 40) / s1);
        }
    }

    #[test]
    fn toy_algebraic_core_exhaustive() {
        let (params, base, triple) = toy();
        let field = params.field();
        let p_plain = polynomial_product(&field, triple.sk.f(), &base);
        let q_plain = polynomial_product(&field, triple.sk.h(), &base);
        for x in 0..7u64 {
            for alpha in 1..7u64 {
                let sig = match sign_hash_with_nonce(&triple.sk, &params, &w(x), &w(alpha)) {
                    Ok(s) => s,
                    Err(Error::DegenerateHash) => continue,
                    Err(e) => panic!("{e}"),
                };
                let fx = field.eval(triple.sk.f(), &w(x));
                let hx = field.eval(triple.sk.h(), &w(x));
                for (idx, q_ij) in triple.pk.q_matrix().entries().iter().enumerate() {
                    let lhs = mul_mod(sig.f_part(), q_ij, triple.sk.op2().modulus()).unwrap();
                    let rhs = field.mul(&field.mul(&w(alpha), &fx), &q_plain.entries()[idx]);
                    assert_eq!(field.reduce(&lhs), rhs);
                }
                for (idx, p_ij) in triple.pk.p_matrix().entries().iter().enumerate() {
                    let lhs = mul_mod(sig.h_part(), p_ij, triple.sk.op1().modulus()).unwrap();
                    let rhs = field.mul(&field.mul(&w(alpha), &hx), &p_plain.entries()[idx]);
                    assert_eq!(field.reduce(&lhs), rhs);
                }
                assert!(verify_hash(&triple.vk, &params, &w(x), &sig).unwrap());
            }
        }
    }

    #[test]
    fn toy_roots_are_degenerate() {
        let (params, _, triple) = toy();
        // f = 3 + 5x vanishes at x = 5 (3 + 25 = 28).
        assert_eq!(
            sign_hash_with_nonce(&triple.sk, &params, &w(5), &w(1)),
            Err(Error::DegenerateHash)
        );
    }

    #[test]
    fn sign_verify_and_tamper() {
        let params = ParamSet::Ds64.params();
        let mut rng = ChaCha20Rng::seed_from_u64(30);
        let triple = ds_keygen(&params, &mut rng).unwrap();
        let msg = b"attack at dawn";
        let a = sign(&triple.sk, &triple.vk, &params, msg, &mut rng).unwrap();
        let b = sign(&triple.sk, &triple.vk, &params, msg, &mut rng).unwrap();
        assert_ne!(a, b);
        assert!(verify(&triple.vk, &params, msg, &a).unwrap());
        assert!(verify(&triple.vk, &params, msg, &b).unwrap());
        assert!(!verify(&triple.vk, &params, b"attack at dusk", &a).unwrap());
    }

    #[test]
    fn zero_and_oversized_signatures() {
        assert!(Signature::new(w(0), w(0)).is_err());
        assert!(Signature::new(w(1), w(0)).is_err());
        let params = ParamSet::Ds64.params();
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let triple = ds_keygen(&params, &mut rng).unwrap();
        let huge = Signature::new(WideUint::pow2(136).unwrap(), w(1)).unwrap();
        assert!(matches!(
            verify(&triple.vk, &params, b"m", &huge),
            Err(Error::Parameter(_))
        ));
        let other = ParamSet::Ds96.params();
        let sig = sign(&triple.sk, &triple.vk, &params, b"m", &mut rng).unwrap();
        assert!(verify(&triple.vk, &other, b"m", &sig).is_err());
    }
}
