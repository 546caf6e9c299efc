use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("vertex {0:?} is isolated; its bias is undefined")]
    IsolatedVertex(String),
    #[error("assignment does not cover vertex {0:?}")]
    MissingVertex(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("graph has {vertices} vertices; brute force is limited to {limit}")]
    SizeLimit { vertices: usize, limit: usize },
    #[error("ordering has frontier width {width}; limit is {limit}")]
    FrontierWidth { width: usize, limit: usize },
    #[error("invalid vertex ordering: {0}")]
    InvalidOrdering(String),
    #[error("argument {0} lies outside [-1, +1]")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("graph has zero optimum; ratio is undefined")]
    ZeroOptimum,
    #[error("class map inconsistent with graph: {0}")]
    InconsistentClassMap(String),
    #[error("quadratic form has {0} variables; at most 6 are supported")]
    Dimension(usize),
    #[error("numerical trouble in float simplex: {0}")]
    NumericDegeneracy(String),
    #[error("linear program is {0}")]
    LpStatus(String),
    #[error("edge-weight reconstruction failed: {0}")]
    Reconstruction(String),
    #[error("pair type cannot be decoded: {0}")]
    DecodeInconsistency(String),
    #[error("unknown bound id {0:?}")]
    UnknownBound(String),
    #[error("unknown instance {0:?}")]
    UnknownInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
