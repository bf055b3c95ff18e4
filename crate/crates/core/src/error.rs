use thiserror::Error;

/// Errors raised by the numerical routines and the envelope machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("characteristic exponent is not integrable: {0}")]
    NonIntegrableExponent(String),
    #[error("density oracle does not support dimension {0} (d must be 1, 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("invalid scaling exponent: {0}")]
    InvalidExponent(String),
    #[error("missing scaling certificate: {0}")]
    MissingCertificate(String),
    #[error("degenerate scaling certificate: {0}")]
    DegenerateCertificate(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("function takes non-positive values: {0}")]
    NonPositiveValues(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("derivative evaluation failed: {0}")]
    DerivativeFailure(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
