use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("{what} supports at most {max} blocks, got {k}")]
    TooLarge {
        k: usize,
        max: usize,
        what: &'static str,
    },

    #[error("support must be nonempty")]
    EmptySupport,

    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The optimiser returned a system outside the proven bounds on `w_*`.
    /// This is a bug signal, not a convergence warning.
    #[error("w_* bracketing violated: {0}")]
    Bracketing(String),
}

impl Error {
    /// Stable machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidMatrix(_) => "invalid_matrix",
            Error::InvalidVector(_) => "invalid_vector",
            Error::TooLarge { .. } => "too_large",
            Error::EmptySupport => "empty_support",
            Error::InvalidGraphon(_) => "invalid_graphon",
            Error::InvalidDecomposition(_) => "invalid_decomposition",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Bracketing(_) => "bracketing",
        }
    }
}
