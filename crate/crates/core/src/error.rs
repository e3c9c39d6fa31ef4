use thiserror::Error;

/// Errors raised by the structure, logic, and decomposition routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An exhaustive search would exceed its configured size limit.
    #[error("budget exceeded: {what} is {actual}, limit {limit}")]
    Budget {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
    #[error("malformed structure: {0}")]
    Structural(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("scope error: {0}")]
    Scope(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("signature mismatch: {0}")]
    Signature(String),
}

impl Error {
    /// Short machine-readable tag, used for JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Budget { .. } => "budget",
            Error::Structural(_) => "structural",
            Error::Argument(_) => "argument",
            Error::Scope(_) => "scope",
            Error::Format(_) => "format",
            Error::Signature(_) => "signature",
        }
    }

    pub(crate) fn budget(what: &'static str, limit: usize, actual: usize) -> Self {
        Error::Budget {
            what,
            limit,
            actual,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_budget(what: &'static str, limit: usize, actual: usize) -> Result<()> {
    if actual > limit {
        Err(Error::budget(what, limit, actual))
    } else {
        Ok(())
    }
}
