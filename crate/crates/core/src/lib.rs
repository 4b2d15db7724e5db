//! Hidden-ring polynomial public-key schemes (KEM and signatures) and a
//! permutation-pad stream cipher, with a portable byte encoding and
//! known-answer test generation.

pub mod codec;
pub mod error;
pub mod field;
pub mod hidden_ring;
pub mod hppk_ds;
pub mod hppk_kem;
pub mod kat;
pub mod keystream;
pub mod params;
pub mod qpp;
pub mod ring_arith;

pub use error::{Error, Result};
pub use field::PrimeField;
pub use hidden_ring::RingOperator;
pub use hppk_ds::{ds_keygen, sign, verify, DsVerificationKey, KeyTriple, Signature};
pub use hppk_kem::{decapsulate, encapsulate, keygen, KemCiphertext, KemPrivateKey, KemPublicKey};
pub use keystream::{BitSource, Keystream};
pub use params::{DsParams, HppkParams, KemParams, ParamSet, SecurityLevel};
pub use qpp::{generate_pad, DispatchMode, Permutation, PermutationPad};
pub use ring_arith::{BarrettContext, WideUint};
