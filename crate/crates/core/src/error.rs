use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid branching law: {0}")]
    InvalidLaw(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("ball of radius {radius} exceeds the capacity of {cap} vertices")]
    Capacity { radius: usize, cap: usize },

    #[error("reduced matrix of size {size} exceeds the dense limit of {limit}")]
    DenseLimit { size: usize, limit: usize },

    #[error("ball has no interior vertices")]
    EmptyInterior,

    #[error("ball has no boundary vertices")]
    EmptyBoundary,

    #[error("vertex {0} has neighbors outside the materialized ball")]
    OutOfDomain(VertexId),

    #[error("vertex {0} lies on the boundary")]
    BoundaryVertex(VertexId),

    #[error("vertex index {0} is out of range")]
    IndexOutOfRange(usize),

    #[error("function has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("the graph is not a tree")]
    NotATree,

    #[error("ball does not come from a model tree centered at its root")]
    NotAModelBall,

    #[error("vertex set is not connected")]
    Disconnected,

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("criteria disagree: {0}")]
    ConflictingCriteria(String),

    #[error("invalid graph spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
