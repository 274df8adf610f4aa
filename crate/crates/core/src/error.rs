use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex count must be positive")]
    EmptyGraph,

    #[error("probability {name} = {value} is outside [0, 1]")]
    Probability { name: &'static str, value: f64 },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate balance: graphs have no mismatching pairs (matches = {matches}, mismatches = 0)")]
    DegenerateAlpha { matches: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite score at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("n = {n} exceeds the dense oracle cap of {cap}")]
    OracleCap { n: usize, cap: usize },

    #[error("zero start vector")]
    ZeroVector,

    #[error("{0}")]
    EmptyInput(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Write(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
