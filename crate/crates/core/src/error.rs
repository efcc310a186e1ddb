use alloc::string::String;
use core::fmt;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar with a nonzero imaginary part was handed to a real-mode value.
    FieldMismatch,
    /// A constructor argument violated a documented precondition.
    InvalidParameter(String),
    /// A schedule or layout would exceed its configured size cap.
    SizeCapExceeded(String),
    /// The requested index lies beyond the built depth of a schedule,
    /// form sequence or layout.
    DepthExceeded { requested: usize, available: usize },
    /// A norm interval whose tail bound cannot be brought below the usability
    /// threshold at the truncation cap.
    UnusableInterval { lo: f64, hi: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::FieldMismatch => write!(f, "nonzero imaginary part in real-field mode"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::SizeCapExceeded(msg) => write!(f, "size cap exceeded: {msg}"),
            Error::DepthExceeded {
                requested,
                available,
            } => write!(
                f,
                "index {requested} beyond built depth {available}"
            ),
            Error::UnusableInterval { lo, hi } => write!(
                f,
                "norm interval [{lo}, {hi}] unusable: tail bound too wide at truncation cap"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
