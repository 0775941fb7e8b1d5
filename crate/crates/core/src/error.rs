use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("non-numeric cell {value:?} in {path} at row {row}, column {column}")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{kind} identity violated at index {index} ({label}): relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    Identity {
        kind: &'static str,
        index: usize,
        label: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("unknown country code {0:?}")]
    UnknownCountry(String),

    #[error("technical-coefficient matrix has spectral radius estimate {0:.6} >= 1")]
    SpectralRadius(f64),

    #[error("matrix I - A is singular")]
    Singular,

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("all strengths are zero")]
    ZeroStrength,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
