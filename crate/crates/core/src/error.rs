use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("input contains NaN at index {0}")]
    NotANumber(usize),

    #[error("eigensolver did not converge after {matvecs} products (best residual {best_residual:e})")]
    NoConvergence { matvecs: usize, best_residual: f64 },

    #[error(
        "second and third eigenvalues are not separated: |{second}| vs |{third}| (tolerance {tol:e})"
    )]
    AmbiguousEigenvalue { second: f64, third: f64, tol: f64 },

    #[error("root scan for s={s} found {found} roots, expected {expected}")]
    RootScan { s: usize, found: usize, expected: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Experiment(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
