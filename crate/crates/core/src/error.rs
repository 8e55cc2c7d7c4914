use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {0} is outside the supported range 1..=64")]
    UnsupportedDimension(usize),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("element order exceeds cap {0}")]
    OrderExceedsCap(u64),

    #[error("matrix is not an involution")]
    NotAnInvolution,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("group closure exceeds cap of {0} elements")]
    ClosureExceedsCap(usize),

    #[error("block has dimension {found}, expected {expected}")]
    WrongBlockDimension { expected: usize, found: usize },

    #[error("only lambda = 1 can be turned into an exact-cover problem (got {0})")]
    UnsupportedLambda(u64),

    #[error("forced rows {0} and {1} share a column")]
    ForcedConflict(usize, usize),

    #[error("malformed cover problem: {0}")]
    MalformedProblem(String),

    #[error("unknown group {0:?}")]
    UnknownGroup(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}
