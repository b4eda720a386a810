use thiserror::Error;

use crate::tdp::Role;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operands disagree on field parameters")]
    ParamsMismatch,

    #[error("matrix is singular")]
    Singular,

    #[error("eigenvalue at position {0} is zero")]
    ZeroEigenvalue(usize),

    #[error("block of {len} bytes exceeds the {max}-byte block capacity")]
    BlockTooLong { len: usize, max: usize },

    #[error("block does not decode to a padded byte block")]
    ValueOutOfRange,

    #[error("field too small to carry a byte per block (p^(d*d) must exceed 256)")]
    CodecUnsupported,

    #[error("ciphertext framing: expected {expected} blocks, found {found}")]
    Framing { expected: usize, found: usize },

    #[error("expected a {expected:?} token, got {found:?}")]
    RoleMismatch { expected: Role, found: Role },

    #[error("matrix does not satisfy m^(p^d - 1) = I")]
    NotUnitOrder,

    #[error("no pseudo-key candidate reproduced the session key")]
    NotFound,

    #[error("search space of {space} exceeds the limit of {limit}")]
    ParamsTooLarge { space: u128, limit: u128 },

    #[error("{have} samples is below the minimum of {need}")]
    TooFewSamples { have: usize, need: usize },

    #[error("malformed key file: {0}")]
    Format(String),
}
