use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reference policy has zero probability on response {response} of prompt `{prompt}`")]
    CoverageViolation { prompt: String, response: usize },

    #[error("incomplete log: prompt `{prompt}` criterion `{criterion}` has no judgment for pair ({a}, {b})")]
    IncompleteLog {
        prompt: String,
        criterion: String,
        a: usize,
        b: usize,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no regression pairs available after sampling")]
    NoPairs,

    #[error("normal equations are singular with ridge = 0; use a ridge > 0")]
    RankDeficient,

    #[error("i/o error at {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json")]
    Json(#[from] serde_json::Error),

    #[error("csv error")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-parsable category, used by the CLI on failure.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::CoverageViolation { .. } => "coverage-violation",
            Error::IncompleteLog { .. } => "incomplete-log",
            Error::Parse { .. } => "parse",
            Error::NoPairs => "no-pairs",
            Error::RankDeficient => "rank-deficient",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub type Result<T> = std::result::Result<T, Error>;
