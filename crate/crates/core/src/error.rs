use thiserror::Error;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated the operation's precondition.
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },
    /// A numerical procedure failed to reach its tolerance.
    #[error("{op}: numeric failure: {msg}")]
    Numeric { op: &'static str, msg: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub(crate) fn numeric(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Numeric { op, msg: msg.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
