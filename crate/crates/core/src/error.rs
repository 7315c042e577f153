use thiserror::Error;

/// Errors produced by curve evaluation, step construction, and pricing.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation
    /// (negative volatility, evaluation past the end of a curve, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The inputs are individually valid but the combination puts the model
    /// outside its admissible regime (probability out of (0,1), branch
    /// factor not positive). Shrinking the time step usually fixes it.
    #[error("parameter regime: {0}")]
    ParameterRegime(String),

    /// Mismatched shapes: wrong branch count, inconsistent level lengths.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The operation is not defined for this model.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Exhaustive enumeration was asked for more paths than the guard allows.
    #[error("resource guard: {0}")]
    ResourceGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
