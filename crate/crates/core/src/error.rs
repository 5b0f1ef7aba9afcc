use thiserror::Error;

/// Errors produced by the analysis engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    NonConvergence { sweeps: usize, off: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("post-selection is orthogonal to the pre-selection (overlap {0:e})")]
    OrthogonalPostselection(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pointer grid too coarse: {0}")]
    Resolution(String),

    #[error("I/O failure: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
