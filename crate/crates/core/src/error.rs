use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("player index {index} out of range for {n} players")]
    IndexOutOfRange { index: usize, n: usize },

    /// The marginal revenue of a contest is undefined at zero efforts on both
    /// sides when there is no draw probability.
    #[error("marginal revenue undefined at s_ij = s_ji = 0 with r = 0 (players {i}, {j})")]
    Singular { i: usize, j: usize },

    #[error("{method} did not converge after {iterations} iterations (best residual {residual:e})")]
    NonConvergence {
        method: String,
        iterations: usize,
        residual: f64,
    },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("equilibrium is not interior: {0}")]
    NonInterior(String),

    #[error("ambiguous class partition: {0}")]
    AmbiguousPartition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
