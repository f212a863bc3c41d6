//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// `Validation` covers bad input data (corpora, inventories, lexicons,
/// model archives); `Train` covers optimization failures such as a
/// diverging loss. The CLI maps these to exit codes 1 and 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("validation error in {path} line {line}: {msg}")]
    ValidationAt {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("training error: {0}")]
    Train(String),

    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn at(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::ValidationAt {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
