use thiserror::Error;

/// Errors raised by the numerical kernel, the graph model, the consensus
/// backends and the tracker.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("secular iteration for root {index} did not converge within {iterations} iterations")]
    NonConvergence { index: usize, iterations: usize },

    #[error("invalid bracket for root {index}: poles {lower} and {upper} are not separated")]
    InvalidBracket { index: usize, lower: f64, upper: f64 },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("node {node} is isolated")]
    IsolatedNode { node: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("infeasible graph parameters: {0}")]
    InfeasibleParameters(String),

    #[error("no connected graph found after {retries} retries")]
    ConnectivityRetryExhausted { retries: usize },

    #[error("edge ({0}, {1}) is invalid for this operation")]
    InvalidEdge(usize, usize),

    #[error("push-sum weight vanished at node {node}")]
    ZeroWeight { node: usize },

    #[error("consensus step size {epsilon} exceeds the stability bound {bound}")]
    StepSizeTooLarge { epsilon: f64, bound: f64 },

    #[error("invalid consensus configuration: {0}")]
    InvalidConsensus(String),

    #[error("filter fit is ill-conditioned (condition number {condition:e})")]
    IllConditionedFit { condition: f64 },

    #[error("invalid filter fit input: {0}")]
    InvalidFit(String),

    #[error("singular ESPRIT system (condition number {condition:e})")]
    SingularC { condition: f64 },

    #[error("rotational phase {phase} exceeds the unambiguous range {limit}")]
    AngleOutOfRange { phase: f64, limit: f64 },

    #[error("tracker failed at node {node}, root {k}, time {t}: {source}")]
    Tracker {
        node: usize,
        k: usize,
        t: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
