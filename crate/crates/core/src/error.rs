use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the audit and mitigation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A declared column is missing or the file layout disagrees with the schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell could not be parsed; `row` is the zero-based data row index.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    /// Input violated a documented invariant (label outside {{0,1}}, empty slice, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// The request exceeds what the chosen algorithm can handle.
    #[error("capability error: {0}")]
    Capability(String),

    /// The scoring oracle failed or returned malformed output for a row range.
    #[error("oracle error (rows {start}..{end}): {message}")]
    Oracle {
        start: usize,
        end: usize,
        message: String,
    },

    /// The mitigation target cost cannot be reached by base-rate mixing.
    #[error("infeasible mitigation: {0}")]
    Infeasible(String),

    #[error("config error: {0}")]
    Config(String),

    /// A failure inside baseline permutation `k`.
    #[error("baseline permutation {k}: {source}")]
    Baseline {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
