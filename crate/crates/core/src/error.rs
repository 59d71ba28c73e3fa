use core::fmt;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or configuration value is out of its valid domain.
    Config(&'static str),
    /// Vector or parameter shapes disagree.
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// An operation was invoked in a state that forbids it.
    Usage(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Shape {
                what,
                expected,
                found,
            } => write!(f, "shape error: {what}: expected {expected}, found {found}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
