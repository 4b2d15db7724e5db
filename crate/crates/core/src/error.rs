use thiserror::Error;

/// Errors produced by the arithmetic, cipher and codec layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A result would not fit in [`crate::ring_arith::WIDE_BITS`] bits.
    #[error("arithmetic capacity exceeded: {0}")]
    Capacity(&'static str),

    #[error("subtraction underflow")]
    Underflow,

    #[error("division by zero")]
    DivisionByZero,

    #[error("value is not invertible modulo the given modulus")]
    NotInvertible,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Malformed serialized data. `offset` is the byte position where
    /// decoding gave up.
    #[error("format error at offset {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("decapsulation failed: {0}")]
    Decapsulation(&'static str),

    /// The message digest is a root of `f` or `h`; no choice of the signing
    /// nonce can produce a valid signature.
    #[error("message hash is a root of a signing polynomial")]
    DegenerateHash,

    #[error("key generation failed: {0}")]
    Generation(String),

    #[error("signing failed: {0}")]
    Signing(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn format(offset: usize, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
