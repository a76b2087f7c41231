use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("duplicate axis `{0}`")]
    DuplicateAxis(String),

    #[error("axis sets overlap on `{0}`")]
    OverlappingAxes(String),

    #[error("distribution does not match pattern: {0}")]
    PatternMismatch(String),

    #[error("no admissible point found within the search budget")]
    NoAdmissiblePoint,

    #[error("channel is not multilevel: {0}")]
    NotMultilevel(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("unbound constants with no covering assumption: {}", .0.join(", "))]
    UnboundConstants(Vec<String>),

    #[error("variable sets differ: {0}")]
    VariableMismatch(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{what} exceeds cap ({size} > {cap}); {hint}")]
    CapExceeded {
        what: String,
        size: u128,
        cap: u128,
        hint: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("message index {0} out of range")]
    MessageOutOfRange(usize),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Cap violations map to a distinct process exit code in the CLI.
    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
