use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("malformed field: {0}")]
    MalformedField(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radius out of range: {0}")]
    RadiusOutOfRange(String),

    #[error("quadrature rule too coarse: {0}")]
    QuadratureTooCoarse(String),

    #[error("multiplier undefined at squared frequency magnitude {0}")]
    MultiplierUndefined(u64),

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("not enough usable scales: {0}")]
    InsufficientScales(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
