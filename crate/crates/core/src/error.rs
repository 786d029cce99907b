use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("flow keys must be non-empty")]
    EmptyKey,
    #[error("sampling probability must be in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("{name} must be in (0, 1), got {value}")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("zipf exponent must be >= 0, got {0}")]
    NegativeSkew(f64),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("prefix length {requested} outside 1..={available}")]
    PrefixOutOfRange { requested: usize, available: usize },
    #[error("{path}:{line}: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: &'static str,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Signals that a cuckoo insertion gave up after the eviction bound; the item was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cuckoo table full: insertion abandoned after {kicks} evictions")]
pub struct TableFull {
    pub kicks: u32,
}
