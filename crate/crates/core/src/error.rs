use core::fmt;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter set violates one of its bounds.
    Config {
        field: &'static str,
        reason: &'static str,
    },
    /// An operation was called with arguments outside its contract.
    Usage(&'static str),
    /// A bookkeeping invariant was broken, e.g. a best-found fitness above the true optimum.
    Consistency(&'static str),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: &'static str) -> Self {
        Error::Config { field, reason }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config { field, reason } => write!(f, "invalid configuration: `{field}` {reason}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Consistency(msg) => write!(f, "internal consistency error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
