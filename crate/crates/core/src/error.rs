use thiserror::Error;

use crate::config::ConfigViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The estimator configuration violates one or more invariants.
    #[error("invalid configuration: {}", join_violations(.0))]
    Config(Vec<ConfigViolation>),

    /// The caller broke an API precondition (mismatched lengths, bad parameter).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("index out of range: {0}")]
    Range(String),

    /// Input data cannot be processed (bad symbol, non-finite sample).
    #[error("data error: {0}")]
    Data(String),

    #[error("non-finite sample at absolute index {index}")]
    NonFinite { index: u64 },

    #[error("no feature detected: {0}")]
    NoFeature(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Internal window bookkeeping went wrong; indicates a bug in the caller
    /// of a low-level window kernel.
    #[error("internal contract violated: {0}")]
    Contract(String),
}

fn join_violations(v: &[ConfigViolation]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
