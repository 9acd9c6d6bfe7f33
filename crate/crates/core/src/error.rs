use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed graph document: {0}")]
    Malformed(String),
    #[error("{location}: {message}")]
    InvalidGraph { location: String, message: String },
    #[error("graph must contain at least one node")]
    EmptyGraph,
    #[error("empty scope")]
    EmptyScope,
    #[error("edgeless scope: greedy modularity needs at least one edge")]
    EdgelessScope,
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("{measure} did not converge after {iterations} iterations")]
    NoConvergence { measure: String, iterations: usize },
    #[error("unknown focus '{0}'")]
    UnknownFocus(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("topic {topic} is infeasible: {reason}")]
    InfeasibleTopic { topic: String, reason: String },
    #[error("unknown topic '{0}'")]
    UnknownTopic(String),
    #[error("no skeletons to select from")]
    NoSkeletons,
    #[error("empty fact pool")]
    EmptyFactPool,
    #[error("annotation '{0}' is larger than the canvas")]
    AnnotationTooLarge(String),
    #[error("unknown fact '{0}'")]
    UnknownFact(String),
    #[error("cannot remove topic root")]
    RemoveRoot,
    #[error("unknown element '{0}'")]
    UnknownElement(String),
    #[error("cancelled")]
    Cancelled,
    #[error("template error: {0}")]
    Template(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
