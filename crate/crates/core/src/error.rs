use thiserror::Error;

/// Errors raised by the model library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function or distribution.
    #[error("domain error: {0}")]
    Domain(String),
    /// Internal state violated an invariant (counts, masses, indicators).
    #[error("consistency error: {0}")]
    Consistency(String),
    /// A configuration was rejected before any work began.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
