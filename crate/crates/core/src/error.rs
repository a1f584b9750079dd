use thiserror::Error;

use crate::graph::VertexId;

/// Errors returned by the library, including stream parse errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("self-loop on vertex {0} is not a valid edge")]
    SelfLoop(VertexId),

    #[error("vertex {vertex} is out of range for a universe of {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("phase planning requested with no remaining updates")]
    NoWork,

    #[error("lookahead exhausted: needed {needed} updates, only {available} available")]
    LookaheadExhausted { needed: usize, available: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Broken internal precondition of the mate store. Signals a bug in the caller,
/// never bad user input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("cannot mate {0}: vertex {1} already has a mate")]
    AlreadyMated(crate::graph::Edge, VertexId),

    #[error("cannot clear {0}: endpoints are not mated to each other")]
    NotMated(crate::graph::Edge),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
