use std::path::PathBuf;

use crate::dictionary::AtomId;

/// Errors raised by the biorthogonalization routines and their file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("atom centered at {center} is degenerate on the grid (norm {norm:e})")]
    DegenerateAtom { center: f64, norm: f64 },

    #[error("unknown atom id {0}")]
    UnknownAtom(AtomId),

    #[error("atom id {0} is already active")]
    DuplicateAtom(AtomId),

    #[error("cannot remove the last remaining atom {0}")]
    LastAtom(AtomId),

    #[error("atom {id} is linearly dependent on the active set (residual norm {residual:e})")]
    LinearlyDependent { id: AtomId, residual: f64 },

    #[error("dual of atom {id} has squared norm {norm_sq:e}; state is corrupted")]
    IllConditioned { id: AtomId, norm_sq: f64 },

    #[error("Gram matrix is singular (pivot {pivot} below floor)")]
    SingularGram { pivot: usize },

    #[error("approximation does not match the dual state: {0}")]
    Inconsistent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::LinearlyDependent { .. }
                | Error::SingularGram { .. }
                | Error::IllConditioned { .. }
                | Error::DegenerateAtom { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
