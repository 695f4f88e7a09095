use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("odd half-edge sum {0} (enable auto-fix to add one half-edge)")]
    OddDegreeSum(u64),
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("no admissible threshold for the heavier transform: {0}")]
    NoHashThreshold(String),
    #[error("path is not adjacent between positions {0} and {1}")]
    NotAdjacent(usize, usize),
    #[error("path has no backtracking step")]
    NoBacktrack,
    #[error("enumeration exceeded cap of {0}")]
    EnumerationCap(usize),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("penalty does not dominate on edge ({0},{1}): keep probability {2}")]
    NotDominating(usize, usize, f64),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn out_of_range(msg: impl Into<String>) -> Error {
    Error::OutOfRange(msg.into())
}
