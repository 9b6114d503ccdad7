use alloc::string::String;
use core::fmt;

/// Errors raised by the denoising core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands do not share the same shape.
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// An argument lies outside the domain of the function (e.g. log of a nonpositive pixel).
    Domain(String),
    /// A configuration value violates its admissible range.
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
