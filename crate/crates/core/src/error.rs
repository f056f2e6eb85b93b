use thiserror::Error;

/// Errors raised by assembly, spectral computations and the decay pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator assembly failed: {0}")]
    Assembly(String),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver failed on a block of dimension {dim}")]
    Eigensolver { dim: usize },

    #[error("singular value decomposition failed on a block of dimension {dim}")]
    Svd { dim: usize },

    #[error("Cholesky factorization of the energy Gram form failed on a block of dimension {dim}")]
    Cholesky { dim: usize },

    #[error("kernel projector normalization is near-singular (smallest singular value {0:e})")]
    SingularNormalization(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
