use alloc::string::String;
use core::fmt;

/// Errors surfaced by the simulation library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A scenario or solver parameter is outside its allowed range.
    Config(String),
    /// An input value is outside the mathematical domain of an operation.
    Domain(String),
    /// Vector or matrix dimensions do not agree.
    Shape(String),
    /// ZF decoding needs strictly more service antennas than users.
    ZfUnderdetermined { m: usize, k: usize },
    /// A sample pool was empty where at least one sample is required.
    EmptySamples,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Error::ZfUnderdetermined { m, k } => {
                write!(f, "zero-forcing requires M > K, got M={m}, K={k}")
            }
            Error::EmptySamples => write!(f, "empty sample set"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
