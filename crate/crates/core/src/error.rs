use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("boundary matrix is not unitary (max-norm residual {0:e})")]
    NonUnitary(f64),
    #[error("point {0} lies outside the domain")]
    OutsideDomain(f64),
    #[error("root search failed: {0}")]
    RootSearchFailure(String),
    #[error("eigenfunction normalization failed: {0}")]
    NormalizationFailure(String),
    #[error("spectrum too short: {0}")]
    InsufficientSpectrum(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("degenerate conditional density: {0}")]
    DegenerateDensity(String),
    #[error("eigen-decomposition failed: {0}")]
    EigenFailure(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-positive determinant (sign {sign}, log|det| {log_abs})")]
    NonPositiveDeterminant { sign: f64, log_abs: f64 },
    #[error("mismatched boundary condition and limit kernel: {0}")]
    MismatchedLimit(String),
    #[error("empty sample set")]
    EmptySamples,
}

pub type Result<T> = std::result::Result<T, Error>;
