use std::io;

use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("token {0:?} contains whitespace and cannot be written to a sequence file")]
    WhitespaceToken(String),

    #[error("vocabulary is {expected} but sequence from {source_id:?} is {found}")]
    MixedTokenModes {
        expected: &'static str,
        found: &'static str,
        source_id: String,
    },

    #[error("malformed {kind} at line {line}: {reason}")]
    Parse {
        kind: &'static str,
        line: usize,
        reason: String,
    },

    #[error("bad model file: {0}")]
    Format(String),

    #[error("position {position} out of range for a sequence with {len} calls")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("query vector has zero norm")]
    ZeroNormQuery,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("train/test overlap on projects: {0:?}")]
    ProjectOverlap(Vec<String>),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
