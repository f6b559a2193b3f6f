use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument fell outside the domain of an operation.
    #[error("`{param}` out of domain: {reason}")]
    Domain { param: &'static str, reason: String },

    /// Input violated a structural precondition (empty set, mixed tasks, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate topology: {0}")]
    DegenerateTopology(String),

    #[error("{path}: row {row}: {reason}")]
    StationRow {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            param,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem rather than by input values.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
