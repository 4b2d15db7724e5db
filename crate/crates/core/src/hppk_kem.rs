//! HPPK key encapsulation.
//!
//! Two plain polynomials share a base factor `B(x, u)`:
//! `p(x, u) = B(x, u) f(x)` and `q(x, u) = B(x, u) h(x)` over `F_p`. Their
//! coefficient matrices are encrypted with independent hidden-ring operators
//! `(R1, S1)` and `(R2, S2)` to form the public key. An encapsulator evaluates
//! the encrypted polynomials at `x^i u_j mod p` as plain integer sums; the key
//! owner strips the ring operators, divides out `B` by taking the ratio
//! `f(x)/h(x)` and solves the linear equation for `x`.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::hidden_ring::RingOperator;
use crate::params::KemParams;
use crate::ring_arith::WideUint;

/// Resampling bound for degenerate key draws.
const MAX_KEYGEN_ATTEMPTS: usize = 64;

/// Dense row-major matrix of integers. Row `i` carries the coefficient of
/// `x^i`, column `j` the coefficient of `u_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<WideUint>,
}

impl CoeffMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<WideUint>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::param("matrix entry count does not match its shape"));
        }
        Ok(CoeffMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> WideUint) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        CoeffMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &WideUint {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[WideUint] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = &WideUint> + '_ {
        (0..self.rows).map(move |i| self.get(i, j))
    }
}

/// Private key: `f`, `h` (lowest degree first) and the two ring operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KemPrivateKey {
    f: Vec<WideUint>,
    h: Vec<WideUint>,
    op1: RingOperator,
    op2: RingOperator,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KemPublicKey {
    p_mat: CoeffMatrix,
    q_mat: CoeffMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KemCiphertext {
    pub p_bar: WideUint,
    pub q_bar: WideUint,
}

fn check_poly(field: &PrimeField, coeffs: &[WideUint], lambda: usize, name: &str) -> Result<()> {
    if coeffs.len() != lambda + 1 {
        return Err(Error::param(format!(
            "{name} must have lambda + 1 coefficients"
        )));
    }
    if coeffs.iter().any(|c| !field.contains(c)) {
        return Err(Error::param(format!(
            "{name} has a coefficient outside F_p"
        )));
    }
    if coeffs[lambda].is_zero() {
        return Err(Error::param(format!(
            "{name} has a zero leading coefficient"
        )));
    }
    Ok(())
}

/// True when `f = c * h` for some scalar `c`.
fn proportional(field: &PrimeField, f: &[WideUint], h: &[WideUint]) -> bool {
    let lead = f.len() - 1;
    let Ok(h_inv) = field.inv(&h[lead]) else {
        return false;
    };
    let c = field.mul(&f[lead], &h_inv);
    f.iter().zip(h).all(|(fi, hi)| &field.mul(&c, hi) == fi)
}

impl KemPrivateKey {
    pub fn from_parts(
        params: &KemParams,
        f: Vec<WideUint>,
        h: Vec<WideUint>,
        op1: RingOperator,
        op2: RingOperator,
    ) -> Result<Self> {
        let field = params.field();
        check_poly(&field, &f, params.lambda, "f")?;
        check_poly(&field, &h, params.lambda, "h")?;
        if proportional(&field, &f, &h) {
            return Err(Error::param("f is a scalar multiple of h"));
        }
        for op in [&op1, &op2] {
            if op.bits() != params.ring_bits {
                return Err(Error::param("ring operator width differs from L"));
            }
        }
        Ok(KemPrivateKey { f, h, op1, op2 })
    }

    pub fn f(&self) -> &[WideUint] {
        &self.f
    }

    pub fn h(&self) -> &[WideUint] {
        &self.h
    }

    /// `(R1, S1)`, which encrypts `p`.
    pub fn op1(&self) -> &RingOperator {
        &self.op1
    }

    /// `(R2, S2)`, which encrypts `q`.
    pub fn op2(&self) -> &RingOperator {
        &self.op2
    }
}

impl KemPublicKey {
    pub fn from_parts(params: &KemParams, p_mat: CoeffMatrix, q_mat: CoeffMatrix) -> Result<Self> {
        let limit = WideUint::pow2(u64::from(params.ring_bits))?;
        for mat in [&p_mat, &q_mat] {
            if mat.rows() != params.rows() || mat.cols() != params.m {
                return Err(Error::param(
                    "public matrix shape does not match parameters",
                ));
            }
            if mat.entries().iter().any(|e| e >= &limit) {
                return Err(Error::param("public matrix entry exceeds 2^L"));
            }
        }
        Ok(KemPublicKey { p_mat, q_mat })
    }

    /// Encrypted coefficients of `p(x, u)` under `(R1, S1)`.
    pub fn p_matrix(&self) -> &CoeffMatrix {
        &self.p_mat
    }

    /// Encrypted coefficients of `q(x, u)` under `(R2, S2)`.
    pub fn q_matrix(&self) -> &CoeffMatrix {
        &self.q_mat
    }
}

/// Coefficient matrix of `f(x) * B(x, u)` over `F_p`: entry `(i, j)` is
/// `sum_k f_k * b_(i-k, j)`.
pub fn polynomial_product(field: &PrimeField, f: &[WideUint], base: &CoeffMatrix) -> CoeffMatrix {
    let rows = base.rows() + f.len() - 1;
    CoeffMatrix::from_fn(rows, base.cols(), |i, j| {
        f.iter()
            .enumerate()
            .filter(|(k, _)| *k <= i && i - k < base.rows())
            .fold(WideUint::zero(), |acc, (k, fk)| {
                field.add(&acc, &field.mul(fk, base.get(i - k, j)))
            })
    })
}

fn check_base(params: &KemParams, base: &CoeffMatrix) -> Result<()> {
    let field = params.field();
    if base.rows() != params.n + 1 || base.cols() != params.m {
        return Err(Error::param("base polynomial shape must be (n + 1) x m"));
    }
    if base.entries().iter().any(|b| !field.contains(b)) {
        return Err(Error::param("base coefficient outside F_p"));
    }
    if (0..base.cols()).any(|j| base.column(j).all(WideUint::is_zero)) {
        return Err(Error::param("base polynomial has an all-zero noise column"));
    }
    Ok(())
}

/// Deterministic key construction from explicit secrets.
pub fn keypair_from_parts(
    params: &KemParams,
    f: Vec<WideUint>,
    h: Vec<WideUint>,
    base: &CoeffMatrix,
    op1: RingOperator,
    op2: RingOperator,
) -> Result<(KemPrivateKey, KemPublicKey)> {
    check_base(params, base)?;
    let sk = KemPrivateKey::from_parts(params, f, h, op1, op2)?;
    let field = params.field();
    let p_plain = polynomial_product(&field, &sk.f, base);
    let q_plain = polynomial_product(&field, &sk.h, base);
    let p_mat = CoeffMatrix::new(
        p_plain.rows(),
        p_plain.cols(),
        sk.op1.encrypt_coefficients(p_plain.entries(), &params.p)?,
    )?;
    let q_mat = CoeffMatrix::new(
        q_plain.rows(),
        q_plain.cols(),
        sk.op2.encrypt_coefficients(q_plain.entries(), &params.p)?,
    )?;
    let pk = KemPublicKey::from_parts(params, p_mat, q_mat)?;
    Ok((sk, pk))
}

fn sample_poly<R: RngCore + ?Sized>(
    field: &PrimeField,
    rng: &mut R,
    lambda: usize,
) -> Result<Vec<WideUint>> {
    let mut coeffs = (0..lambda)
        .map(|_| field.random(rng))
        .collect::<Result<Vec<_>>>()?;
    coeffs.push(field.random_nonzero(rng)?);
    Ok(coeffs)
}

/// Generates a key pair. Draws `f`, `h`, the base polynomial, then the two
/// ring operators; degenerate draws are resampled up to 64 times.
pub fn keygen<R: RngCore + ?Sized>(
    params: &KemParams,
    rng: &mut R,
) -> Result<(KemPrivateKey, KemPublicKey)> {
    let field = params.field();
    for _ in 0..MAX_KEYGEN_ATTEMPTS {
        let f = sample_poly(&field, rng, params.lambda)?;
        let h = sample_poly(&field, rng, params.lambda)?;
        let entries = (0..(params.n + 1) * params.m)
            .map(|_| field.random(rng))
            .collect::<Result<Vec<_>>>()?;
        let base = CoeffMatrix::new(params.n + 1, params.m, entries)?;
        if proportional(&field, &f, &h) || check_base(params, &base).is_err() {
            continue;
        }
        let op1 = RingOperator::generate(rng, params.ring_bits)?;
        let op2 = RingOperator::generate(rng, params.ring_bits)?;
        return keypair_from_parts(params, f, h, &base, op1, op2);
    }
    Err(Error::Generation(
        "degenerate key draws exhausted the retry budget".into(),
    ))
}

/// Encapsulates a fresh random secret with nonzero noise.
pub fn encapsulate<R: RngCore + ?Sized>(
    pk: &KemPublicKey,
    params: &KemParams,
    rng: &mut R,
) -> Result<(WideUint, KemCiphertext)> {
    let field = params.field();
    let secret = field.random(rng)?;
    let noise = (0..params.m)
        .map(|_| field.random_nonzero(rng))
        .collect::<Result<Vec<_>>>()?;
    let ct = encapsulate_with(pk, params, &secret, &noise)?;
    Ok((secret, ct))
}

/// Encapsulates `secret` under explicit noise `u_1..u_m`:
/// `P_bar = sum_ij P_ij * (x^i u_j mod p)` as a plain integer, likewise `Q_bar`.
pub fn encapsulate_with(
    pk: &KemPublicKey,
    params: &KemParams,
    secret: &WideUint,
    noise: &[WideUint],
) -> Result<KemCiphertext> {
    let field = params.field();
    if pk.p_mat.rows() != params.rows() || pk.p_mat.cols() != params.m {
        return Err(Error::param("public key shape does not match parameters"));
    }
    if !field.contains(secret) {
        return Err(Error::param("secret outside F_p"));
    }
    if noise.len() != params.m || noise.iter().any(|u| !field.contains(u)) {
        return Err(Error::param("noise must be m elements of F_p"));
    }
    let mut p_bar = WideUint::zero();
    let mut q_bar = WideUint::zero();
    let mut x_pow = field.reduce(&WideUint::one());
    for i in 0..params.rows() {
        for (j, u) in noise.iter().enumerate() {
            let x_ij = field.mul(&x_pow, u);
            p_bar = p_bar.checked_add(&pk.p_mat.get(i, j).checked_mul(&x_ij)?)?;
            q_bar = q_bar.checked_add(&pk.q_mat.get(i, j).checked_mul(&x_ij)?)?;
        }
        x_pow = field.mul(&x_pow, secret);
    }
    Ok(KemCiphertext { p_bar, q_bar })
}

/// Strips the ring operators: `p_bar = (R1^-1 * P_bar mod S1) mod p`, and
/// `q_bar` likewise with `(R2, S2)`.
pub fn decrypt_components(
    sk: &KemPrivateKey,
    ct: &KemCiphertext,
    params: &KemParams,
) -> Result<(WideUint, WideUint)> {
    let field = params.field();
    let p_bar = sk.op1.invert(&ct.p_bar.rem(sk.op1.modulus())?)?;
    let q_bar = sk.op2.invert(&ct.q_bar.rem(sk.op2.modulus())?)?;
    Ok((field.reduce(&p_bar), field.reduce(&q_bar)))
}

/// Recovers the secret from a ciphertext.
///
/// With `k = p_bar / q_bar`, the secret solves `f(x) - k h(x) = 0`. The
/// equation is solved multiplied through by `q_bar`,
/// `x = (p_bar h0 - q_bar f0) / (q_bar f1 - p_bar h1)`, which also covers the
/// case `h(x) = 0`. The denominator equals `B(x, u) (f1 h0 - f0 h1)`, so it
/// vanishes only when the base polynomial evaluates to zero.
pub fn decapsulate(sk: &KemPrivateKey, ct: &KemCiphertext, params: &KemParams) -> Result<WideUint> {
    if params.lambda != 1 || sk.f.len() != 2 {
        return Err(Error::param(
            "secret extraction is implemented for lambda = 1",
        ));
    }
    let field = params.field();
    let (p_bar, q_bar) = decrypt_components(sk, ct, params)?;
    if p_bar.is_zero() && q_bar.is_zero() {
        return Err(Error::Decapsulation(
            "ciphertext carries no information about the secret",
        ));
    }
    let num = field.sub(&field.mul(&p_bar, &sk.h[0]), &field.mul(&q_bar, &sk.f[0]));
    let den = field.sub(&field.mul(&q_bar, &sk.f[1]), &field.mul(&p_bar, &sk.h[1]));
    if den.is_zero() {
        return Err(Error::Decapsulation(
            "secret extraction has no unique solution",
        ));
    }
    Ok(field.mul(&num, &field.inv(&den)?))
}

/// Base-2 logarithm of the number of hidden-ring key pairs an exhaustive
/// attacker faces: `log2(9 / (2 pi^2) * 2^(2L))`.
pub fn attack_complexity(ring_bits: u32) -> f64 {
    2.0 * f64::from(ring_bits) + (9.0 / (2.0 * std::f64::consts::PI.powi(2))).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HppkParams;
    use rand_chacha::ChaCha20Rng;
    use rand_core::SeedableRng;

    fn w(v: u64) -> WideUint {
        WideUint::from(v)
    }

    fn ws(v: &[u64]) -> Vec<WideUint> {
        v.iter().map(|&x| w(x)).collect()
    }

    #[test]
    fn convolution_matches_schoolbook_product() {
        let field = PrimeField::new(w(7));
        // f = 3 + 5x, B column 0 = 2 + 6x, column 1 = 4 + 0x
        let base = CoeffMatrix::new(2, 2, ws(&[2, 4, 6, 0])).unwrap();
        let prod = polynomial_product(&field, &ws(&[3, 5]), &base);
        // (3 + 5x)(2 + 6x) = 6 + 28x + 30x^2 = 6 + 0x + 2x^2 (mod 7)
        // (3 + 5x) * 4     = 12 + 20x = 5 + 6x (mod 7)
        assert_eq!(prod.rows(), 3);
        assert_eq!(prod.column(0).cloned().collect::<Vec<_>>(), ws(&[6, 0, 2]));
        assert_eq!(prod.column(1).cloned().collect::<Vec<_>>(), ws(&[5, 6, 0]));
    }

    #[test]
    fn proportional_polynomials_are_rejected() {
        let params = HppkParams::with_ring_bits(3, 1, 1, 1, 8).unwrap();
        let op = || RingOperator::new(w(3), w(200), 8).unwrap();
        let base = CoeffMatrix::new(2, 1, ws(&[1, 1])).unwrap();
        let same = keypair_from_parts(&params, ws(&[2, 3]), ws(&[2, 3]), &base, op(), op());
        assert!(same.is_err());
        let scaled = keypair_from_parts(&params, ws(&[2, 3]), ws(&[4, 6]), &base, op(), op());
        assert!(scaled.is_err());
        let zero_lead = keypair_from_parts(&params, ws(&[2, 0]), ws(&[1, 3]), &base, op(), op());
        assert!(zero_lead.is_err());
        let zero_col = CoeffMatrix::new(2, 1, ws(&[0, 0])).unwrap();
        assert!(
            keypair_from_parts(&params, ws(&[2, 3]), ws(&[1, 3]), &zero_col, op(), op()).is_err()
        );
        assert!(keypair_from_parts(&params, ws(&[2, 3]), ws(&[1, 3]), &base, op(), op()).is_ok());
    }

    #[test]
    fn toy_ratio_equals_f_over_h() {
        let params = HppkParams::with_ring_bits(3, 1, 1, 1, 8).unwrap();
        let field = params.field();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (sk, pk) = keygen(&params, &mut rng).unwrap();
        for x in 0..7u64 {
            let ct = encapsulate_with(&pk, &params, &w(x), &[w(3)]).unwrap();
            let (pb, qb) = decrypt_components(&sk, &ct, &params).unwrap();
            let hx = field.eval(sk.h(), &w(x));
            if qb.is_zero() {
                continue;
            }
            let k = field.mul(&pb, &field.inv(&qb).unwrap());
            let direct = field.mul(&field.eval(sk.f(), &w(x)), &field.inv(&hx).unwrap());
            assert_eq!(k, direct, "x = {x}");
        }
    }

    #[test]
    fn root_of_h_still_decapsulates() {
        let params = HppkParams::with_ring_bits(3, 1, 1, 1, 8).unwrap();
        // h = 1 + x has root x = 6 in F_7; B = 1 (constant column).
        let base = CoeffMatrix::new(2, 1, ws(&[1, 0])).unwrap();
        let op1 = RingOperator::new(w(11), w(199), 8).unwrap();
        let op2 = RingOperator::new(w(13), w(211), 8).unwrap();
        let (sk, pk) =
            keypair_from_parts(&params, ws(&[2, 3]), ws(&[1, 1]), &base, op1, op2).unwrap();
        let ct = encapsulate_with(&pk, &params, &w(6), &[w(5)]).unwrap();
        let (_, qb) = decrypt_components(&sk, &ct, &params).unwrap();
        assert!(qb.is_zero());
        assert_eq!(decapsulate(&sk, &ct, &params).unwrap(), w(6));
    }

    #[test]
    fn vanishing_base_fails_loudly() {
        let params = HppkParams::with_ring_bits(3, 1, 1, 1, 8).unwrap();
        // B = 1 + x vanishes at x = 6.
        let base = CoeffMatrix::new(2, 1, ws(&[1, 1])).unwrap();
        let op1 = RingOperator::new(w(11), w(199), 8).unwrap();
        let op2 = RingOperator::new(w(13), w(211), 8).unwrap();
        let (sk, pk) =
            keypair_from_parts(&params, ws(&[2, 3]), ws(&[5, 1]), &base, op1, op2).unwrap();
        let ct = encapsulate_with(&pk, &params, &w(6), &[w(2)]).unwrap();
        assert!(matches!(
            decapsulate(&sk, &ct, &params),
            Err(Error::Decapsulation(_))
        ));
    }

    #[test]
    fn zero_secret_round_trip() {
        let params = crate::params::ParamSet::Kem32M2.params();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (sk, pk) = keygen(&params, &mut rng).unwrap();
        let ct = encapsulate_with(&pk, &params, &w(0), &[w(9), w(10)]).unwrap();
        assert_eq!(decapsulate(&sk, &ct, &params).unwrap(), w(0));
    }

    #[test]
    fn level_one_shapes() {
        let params = crate::params::ParamSet::Kem32M2.params();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (sk, pk) = keygen(&params, &mut rng).unwrap();
        let limit = WideUint::pow2(72).unwrap();
        for mat in [pk.p_matrix(), pk.q_matrix()] {
            assert_eq!((mat.rows(), mat.cols()), (3, 2));
            assert!(mat.entries().iter().all(|e| e < &limit));
        }
        assert_eq!(sk.op1().modulus().bits(), 72);
    }

    #[test]
    fn noise_randomizes_ciphertexts() {
        let params = crate::params::ParamSet::Kem32M2.params();
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let (sk, pk) = keygen(&params, &mut rng).unwrap();
        let x = w(123_456);
        let a = encapsulate_with(&pk, &params, &x, &ws(&[1, 2])).unwrap();
        let b = encapsulate_with(&pk, &params, &x, &ws(&[3, 4])).unwrap();
        assert_ne!(a, b);
        assert_eq!(decapsulate(&sk, &a, &params).unwrap(), x);
        assert_eq!(decapsulate(&sk, &b, &params).unwrap(), x);
    }

    #[test]
    fn flipped_ciphertext_bit_never_returns_the_secret() {
        let params = crate::params::ParamSet::Kem32M2.params();
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let (sk, pk) = keygen(&params, &mut rng).unwrap();
        for _ in 0..1000 {
            let (x, mut ct) = encapsulate(&pk, &params, &mut rng).unwrap();
            let low = if ct.p_bar.is_odd() {
                ct.p_bar.checked_sub(&w(1))
            } else {
                ct.p_bar.checked_add(&w(1))
            };
            ct.p_bar = low.unwrap();
            match decapsulate(&sk, &ct, &params) {
                Ok(y) => assert_ne!(y, x),
                Err(e) => assert!(matches!(e, Error::Decapsulation(_))),
            }
        }
    }

    #[test]
    fn complexity_closed_form() {
        assert!((attack_complexity(72) - 142.8669).abs() < 1e-3);
        assert!((attack_complexity(1) - 0.8669).abs() < 1e-3);
    }

    #[test]
    fn input_validation() {
        let params = crate::params::ParamSet::Kem32M2.params();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (_, pk) = keygen(&params, &mut rng).unwrap();
        assert!(encapsulate_with(&pk, &params, &params.p, &ws(&[1, 1])).is_err());
        assert!(encapsulate_with(&pk, &params, &w(1), &ws(&[1])).is_err());
        let other = crate::params::ParamSet::Kem32M3.params();
        assert!(encapsulate_with(&pk, &other, &w(1), &ws(&[1, 1, 1])).is_err());
    }
}
