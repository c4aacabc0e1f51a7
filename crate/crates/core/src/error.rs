use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// An internal consistency property did not hold (e.g. an unreachable
    /// configuration inside a connected sector).
    #[error("structural error: {0}")]
    Structural(String),
    /// A configured size cap would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Text input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
