//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A mandatory dataset file is absent.
    #[error("ingestion error: missing required file {}", .0.display())]
    MissingFile(PathBuf),

    /// Malformed dataset content, pinned to the offending line.
    #[error("format error in {file}, line {line}: {message}")]
    Format {
        file: String,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("partition error: {0}")]
    Partition(String),

    #[error("generator spec error: {0}")]
    GeneratorSpec(String),

    /// Incompatible operand shapes, naming both.
    #[error("dimension error in {op}: left is {}x{}, right is {}x{}", lhs.0, lhs.1, rhs.0, rhs.1)]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    /// API misuse (wrong tape, repeated backward, non-scalar backward root).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("training error on graph {graph_index}: {message}")]
    Training {
        graph_index: usize,
        message: String,
    },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Wraps a module error with federation context.
    #[error("round {round}, client {client}: {source}")]
    RoundContext {
        round: usize,
        client: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach round/client context to an error bubbling out of the federation loop.
    pub fn in_round(self, round: usize, client: usize) -> Error {
        Error::RoundContext {
            round,
            client,
            source: Box::new(self),
        }
    }
}
