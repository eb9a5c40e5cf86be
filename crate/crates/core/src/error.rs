use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    Empty,

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("edge ({source_node}, {target}) has weight {weight}; weights must be finite and strictly positive")]
    BadWeight {
        source_node: usize,
        target: usize,
        weight: f64,
    },

    #[error("node index {index} out of range for a graph with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("Laplacian is not normal (commutator residual {residual:e})")]
    NotNormal { residual: f64 },

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph is not undirected (weights are not symmetric)")]
    NotUndirected,

    #[error("matrix must be symmetric")]
    NotSymmetric,

    #[error("{what} exceeds cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("combined-path matrix for pair ({0}, {1}) is numerically singular")]
    SingularPathMatrix(usize, usize),

    #[error("invalid node pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("step {step} exceeds stability limit {limit} (0.1 / ||L||_inf)")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("time {0} is not a recorded sample time")]
    UnknownSampleTime(f64),

    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    ShapeMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}
