use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a physical or structural constraint.
    #[error("invalid configuration `{key}`: {message}")]
    Config { key: String, message: String },

    /// The configuration text could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Two fields or grids that must agree do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A profile measurement is not well defined for the given data.
    #[error("measurement failed: {0}")]
    Measurement(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse failure category, used to pick the process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Simulation,
    Io,
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config { .. } | Error::Parse { .. } => ErrorCategory::Config,
            Error::Dimension(_) | Error::Measurement(_) => ErrorCategory::Simulation,
            Error::Io { .. } => ErrorCategory::Io,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            ErrorCategory::Config => 2,
            ErrorCategory::Simulation => 3,
            ErrorCategory::Io => 4,
        }
    }
}
