use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("negative edge weight at ({0}, {1})")]
    NegativeWeight(usize, usize),

    #[error("non-finite value at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("graph needs at least 2 nodes, got {0}")]
    TooSmall(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("node {0} has zero degree")]
    IsolatedNode(usize),

    #[error("invalid coordinates for point {0}")]
    BadCoordinates(usize),

    #[error("graph is disconnected after {0} attempts")]
    Disconnected(usize),

    #[error("graph is not connected")]
    NotConnected,

    #[error("all pairwise distances are zero")]
    DegenerateData,

    #[error("eigen-solver failed to converge")]
    NumericalFailure,

    #[error("truncation {l} outside 1..={max}")]
    BadTruncation { l: usize, max: usize },

    #[error("random walk is not ergodic (|lambda_1| = {0})")]
    NotErgodic(f64),

    #[error("invalid parameter: {0}")]
    BadParams(&'static str),

    #[error("filter response has a pole at eigenvalue {0}")]
    FilterPole(f64),

    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("covariance is not positive semidefinite (min eigenvalue {0})")]
    NotPsd(f64),

    #[error("reference values have zero range")]
    ZeroRange,

    #[error("every eigenvalue term fell below the floor")]
    AllSkipped,

    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
