//! Crate-wide error type.
//!
//! Low-level numeric kernels treat shape mismatches as programmer error and
//! panic via `assert!`; everything reachable from user input (file loading,
//! configuration, checkpoints, the public layer/model entry points) returns
//! [`Result`] instead.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operand shapes do not conform.
    #[error("shape mismatch in {op}: left is {left}, right is {right}")]
    Shape {
        op: &'static str,
        left: String,
        right: String,
    },

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    Config(String),

    /// Malformed input data, with the 1-based line number when known.
    #[error("{path}:{line}: {message}")]
    Data {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A numeric evaluation produced NaN or infinity.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// A finite numeric result violated a contract, e.g. an unnormalized
    /// probability distribution.
    #[error("numeric contract violated: {0}")]
    Numeric(String),

    /// Training produced a non-finite loss or runaway parameters.
    #[error("training diverged at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    /// Unreadable or corrupt checkpoint.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// The checkpoint's vocabulary does not match the manifest hash.
    #[error("vocabulary hash mismatch: manifest has {expected}, vocabulary file hashes to {actual}")]
    VocabMismatch { expected: String, actual: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn data(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
