use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("attribute dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("node {node} out of range for graph with {len} nodes")]
    NodeOutOfRange { node: usize, len: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("parse error in {record}: {message}")]
    Parse { record: String, message: String },

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("degenerate matrix: {0}")]
    Degenerate(String),

    #[error("brute-force matching limited to {limit} nodes on the smaller side, got {got}")]
    SizeGuard { limit: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("kernel mismatch: {0}")]
    KernelMismatch(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(record: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            record: record.into(),
            message: message.into(),
        }
    }
}
