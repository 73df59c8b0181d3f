use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not positive definite (pivot {pivot} failed)")]
    NotPositiveDefinite { pivot: usize },

    #[error("kernel matrix is singular, log-determinant undefined (pivot {pivot} failed)")]
    QSingular { pivot: usize },

    #[error("kernel {index}: {source}")]
    Kernel {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("kernel has no observed objects")]
    NoObservedData,

    #[error("matrix {index} has zero Frobenius norm")]
    ZeroNorm { index: usize },

    #[error("ROC score undefined: only one class present")]
    OneClassOnly,

    #[error("index {index} out of range for {len} objects")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing ratio {0} outside (0, 1) or not strictly increasing")]
    RatioOutOfRange(f64),

    #[error("training size {n_train} must be smaller than the {len} available objects")]
    TrainTooLarge { n_train: usize, len: usize },

    #[error("invalid label {label} at object {index}; expected +1 or -1")]
    InvalidLabel { index: usize, label: i64 },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, column: usize, message: String },

    #[error("{}: hidden entries do not form whole rows/columns (object {object})", path.display())]
    InvalidMaskPattern { path: PathBuf, object: usize },

    #[error("{}: {message}", path.display())]
    InvalidFormat { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_kernel(self, index: usize) -> Self {
        Error::Kernel { index, source: Box::new(self) }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::Iteration { iteration, source: Box::new(self) }
    }

    /// True for failures of the numerical core (factorizations), as opposed to
    /// bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. } | Error::QSingular { .. } => true,
            Error::Kernel { source, .. } | Error::Iteration { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
