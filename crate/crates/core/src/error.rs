use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A row or value could not be parsed.
    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: u64, msg: String },
    /// Well-formed rows that violate a file-level rule (spacing, ordering, header).
    #[error("{0}")]
    Format(String),
    /// A value outside its domain (negative power, empty pattern, non-finite input).
    #[error("{0}")]
    Domain(String),
    /// Inconsistent configuration (tau mismatch, step not a multiple of tau).
    #[error("{0}")]
    Config(String),
    /// Operation not valid in the current state machine state.
    #[error("{0}")]
    State(String),
    /// Not enough or out-of-range data (history window, calibration window).
    #[error("{0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err($crate::error::Error::$variant(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
