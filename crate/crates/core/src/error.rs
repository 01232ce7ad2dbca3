use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape {dims:?}: {reason}")]
    InvalidShape { dims: Vec<usize>, reason: String },

    #[error("buffer length {len} does not match shape {dims:?} ({expected} elements)")]
    BufferLength {
        dims: Vec<usize>,
        len: usize,
        expected: usize,
    },

    #[error("mode {mode} is out of range for a tensor of order {order}")]
    InvalidMode { mode: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank {rank} for mode {mode} must lie in 1..={dim}")]
    RankOutOfRange {
        mode: usize,
        rank: usize,
        dim: usize,
    },

    #[error("requested {requested} leading vectors from a matrix with {rows} rows")]
    VectorCountOutOfRange { requested: usize, rows: usize },

    #[error("order {order} is infeasible: {count} elements have only {factors} prime factors")]
    InfeasibleOrder {
        order: usize,
        count: usize,
        factors: usize,
    },

    #[error("invalid compression target: {0}")]
    InvalidTarget(String),

    #[error(
        "stored fraction {requested} is infeasible: the factor matrices alone need {minimum:.6} of the original size"
    )]
    InfeasibleBudget { requested: f64, minimum: f64 },

    #[error("cannot compress an all-zero tensor")]
    ZeroTensor,

    #[error("relative error is undefined for an all-zero reference tensor")]
    ZeroReference,

    #[error("core position {position} is out of range for a core of {size} elements")]
    PositionOutOfRange { position: u64, size: usize },

    #[error("duplicate core position {0}")]
    DuplicatePosition(u64),

    #[error("invalid compressed tensor: {0}")]
    InvalidCompressed(String),

    #[error(transparent)]
    Codec(#[from] CodecError),

    #[error("{path}: {message}")]
    Media { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failures while decoding a `.tsvd` / `.thsv` byte stream.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { found: [u8; 4], expected: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated stream while reading {field}: need {expected} bytes at offset {offset}, only {available} available")]
    Truncated {
        field: &'static str,
        offset: usize,
        expected: usize,
        available: usize,
    },

    #[error("core position {position} is out of range for a core of {size} elements")]
    PositionOutOfRange { position: u64, size: u64 },

    #[error("duplicate core position {0}")]
    DuplicatePosition(u64),

    #[error(
        "element count mismatch: original shape holds {original}, reshaped shape holds {reshaped}"
    )]
    ElementCountMismatch { original: u64, reshaped: u64 },

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
}
