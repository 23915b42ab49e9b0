//! Error type shared by all modules.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the physical domain of the operation.
    Domain(String),
    /// A numerical routine failed to converge or produced garbage.
    Numerical(String),
    /// A data file could not be parsed. `line` is 1-based when known.
    Data { line: Option<usize>, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn data(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Data {
            line,
            message: msg.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Numerical(m) => write!(f, "numerical error: {m}"),
            Error::Data {
                line: Some(n),
                message,
            } => write!(f, "data error at line {n}: {message}"),
            Error::Data {
                line: None,
                message,
            } => write!(f, "data error: {message}"),
        }
    }
}

impl std::error::Error for Error {}
