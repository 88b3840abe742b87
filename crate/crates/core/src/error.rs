use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unphysical state: {0}")]
    UnphysicalState(String),

    #[error("pump power {pump_w} W is at or above the oscillation threshold {threshold_w} W")]
    AboveThreshold { pump_w: f64, threshold_w: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error("unknown parameter path `{0}`")]
    UnknownPath(String),

    #[error("parameter `{path}` does not accept value `{value}`")]
    BadParameterValue { path: String, value: String },

    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors raised by the physical model rather than by input
    /// parsing or wiring.
    pub fn is_physical(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::UnphysicalState(_)
                | Error::AboveThreshold { .. }
                | Error::Calibration(_)
        )
    }
}

/// What went wrong on a netlist line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Syntax,
    UnknownKeyword,
    DuplicateName,
    MalformedKeyValue,
    UnknownUnit,
    UnknownKey,
    MissingKey,
    DuplicateKey,
    DuplicateWire,
    InvalidValue,
    ConflictingKeys,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownKeyword => "unknown keyword",
            ParseErrorKind::DuplicateName => "duplicate name",
            ParseErrorKind::MalformedKeyValue => "malformed key=value pair",
            ParseErrorKind::UnknownUnit => "unknown unit suffix",
            ParseErrorKind::UnknownKey => "unknown key",
            ParseErrorKind::MissingKey => "missing key",
            ParseErrorKind::DuplicateKey => "duplicate key",
            ParseErrorKind::DuplicateWire => "duplicate wire",
            ParseErrorKind::InvalidValue => "invalid value",
            ParseErrorKind::ConflictingKeys => "conflicting keys",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}: {message}\n  | {text}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub message: String,
    /// The offending source line, verbatim.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("cycle detected: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("`{consumer}` references undeclared port `{port}`")]
    UnknownReference { consumer: String, port: String },

    #[error("port `{port}` is consumed by both `{first}` and `{second}`")]
    PortConsumedTwice {
        port: String,
        first: String,
        second: String,
    },

    #[error("`{consumer}`: {message}")]
    BadWiring { consumer: String, message: String },
}
