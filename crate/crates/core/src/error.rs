use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which of the two homogeneous node sets an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideKind {
    Image,
    Tag,
}

impl std::fmt::Display for SideKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SideKind::Image => f.write_str("image"),
            SideKind::Tag => f.write_str("tag"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{side} index {index} out of range (side has {len} nodes)")]
    IndexOutOfRange {
        side: SideKind,
        index: usize,
        len: usize,
    },
    #[error("conflicting duplicate {side} similarity ({i}, {k}): {first} vs {second}")]
    ConflictingEdge {
        side: SideKind,
        i: usize,
        k: usize,
        first: f64,
        second: f64,
    },
    #[error("{side} similarity ({i}, {k}) is not a finite number")]
    NonFiniteSimilarity { side: SideKind, i: usize, k: usize },
    #[error("{side} side has {n} nodes but no off-diagonal similarities to take a median of")]
    NoOffDiagonal { side: SideKind, n: usize },
    #[error("{side} median similarity is zero; balance weight 1/|median| is undefined")]
    ZeroMedian { side: SideKind },
    #[error("similarities have already been scaled")]
    AlreadyScaled,
    #[error("graph similarities have not been scaled yet")]
    NotScaled,
    #[error("{side} node {node} has no self-similarity (preference)")]
    MissingPreference { side: SideKind, node: usize },
    #[error("theta must be a finite non-positive number, got {0}")]
    InvalidTheta(f64),
    #[error("({0}, {1}) is not an association edge")]
    NotAnEdge(usize, usize),
    #[error("labeling has length {got}, expected {expected} for the {side} side")]
    LabelLength {
        side: SideKind,
        got: usize,
        expected: usize,
    },
    #[error("no stored {side} similarity between {i} and its exemplar {k}")]
    MissingSimilarity { side: SideKind, i: usize, k: usize },
    #[error("semantic exemplarness undefined: no image has comparable tags with its exemplar")]
    NoSemanticPairs,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("enumeration guard exceeded: n = {n}, m = {m} (limits n <= 8, m <= 6)")]
    EnumerationGuard { n: usize, m: usize },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InvalidConfig(_) | Error::InvalidTheta(_) => 1,
            Error::Parse { .. }
            | Error::Io { .. }
            | Error::IndexOutOfRange { .. }
            | Error::ConflictingEdge { .. }
            | Error::NonFiniteSimilarity { .. } => 2,
            _ => 3,
        }
    }
}
