use thiserror::Error;

use crate::graph::{EdgeId, VertexId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error("edge {0} is not present")]
    InvalidEdge(EdgeId),
    #[error("vertex {0} is not present")]
    InvalidVertex(VertexId),
    #[error("infeasible generator parameters: {0}")]
    InfeasibleParameters(String),
    #[error("input is not a tree")]
    NotATree,
    #[error("invalid weight {weight} on edge {edge}")]
    InvalidWeight { edge: EdgeId, weight: f64 },
    #[error("weight assignment has {got} entries, graph has {expected} edges")]
    WeightCountMismatch { expected: usize, got: usize },
    #[error("weights are not generic: {0}")]
    NonGenericWeights(String),
    #[error("edge set is not a matching: {0}")]
    InvalidMatching(String),
    #[error("solver cap exceeded: {0}")]
    SolverCapExceeded(String),
    #[error("boundary has {size} vertices, enumeration cap is {cap}")]
    BoundaryCapExceeded { size: usize, cap: usize },
    #[error("local bound walk budget of {0} exceeded")]
    WalkBudgetExceeded(u64),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("malformed rooted tree: {0}")]
    MalformedTree(String),
    #[error("boundary condition: {0}")]
    BoundaryCondition(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
