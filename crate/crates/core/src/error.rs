use thiserror::Error;

/// Errors raised by the divergence laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:e} exceeds {tolerance:e})")]
    NonHermitian { deviation: f64, tolerance: f64 },

    #[error("negative eigenvalue {min_eigenvalue:e} below tolerance")]
    NegativeSpectrum { min_eigenvalue: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("algebra mismatch: block dims {left:?} vs {right:?}")]
    AlgebraMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("not a projection (residual {0:e})")]
    NotProjection(f64),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("alpha = {0} is outside the admissible range")]
    BadAlpha(f64),

    #[error("u = {0} is outside [0, 1]")]
    BadU(f64),

    #[error("kappa = {0} is outside (0, 1)")]
    BadKappa(f64),

    #[error("variational point is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("support of rho is not contained in the support of sigma")]
    SupportViolation,

    #[error("quantity is infinite: {0}")]
    Infinite(&'static str),

    #[error("iteration did not converge after {iterations} steps (best value {best})")]
    NotConverged { best: f64, iterations: usize },

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid subalgebra: {0}")]
    InvalidSubalgebra(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("index k = {k} out of range for n = {n}")]
    BadIndex { n: usize, k: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::EigenFailure | Error::Infinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
