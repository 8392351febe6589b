//! Library-wide error type.

use thiserror::Error;

/// Errors produced by the statecomp library.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix dimensions do not match what the operation requires.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A trajectory or pair stream is too short to estimate from.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The input is not a stochastic matrix (row sums or entry range violated).
    #[error("not a stochastic matrix: {0}")]
    NotStochastic(String),

    /// The positivity digraph of the matrix is not strongly connected.
    #[error("not an ergodic-class matrix: {0}")]
    NotErgodic(String),

    /// Detailed balance does not hold to tolerance.
    #[error("matrix is not reversible: max detailed-balance violation {max_violation:.3e}")]
    NotReversible { max_violation: f64 },

    /// An iterative solver failed to converge.
    #[error("did not converge: {context} (residual {residual:.3e})")]
    NotConverged { context: String, residual: f64 },

    /// Mixing-time iteration hit its cap before reaching the target distance.
    #[error("chain did not mix within {cap} steps (last distance {last_distance:.3e})")]
    MixingCapExceeded { cap: usize, last_distance: f64 },

    /// Requested rank is outside [1, min(p, q)].
    #[error("rank {r} out of range for a {rows}x{cols} matrix")]
    RankOutOfRange { r: usize, rows: usize, cols: usize },

    /// The truncated estimate has no positive mass to normalize.
    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),

    /// An operation received an empty input where at least one item is required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A parameter violates its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A generator exhausted its retry budget without producing a valid draw.
    #[error("generator failed: {0}")]
    GeneratorFailed(String),

    /// A latent-state factorization is inconsistent with an observed transition.
    #[error("inconsistent factorization: zero mass at observed transition ({from}, {to})")]
    InconsistentFactorization { from: usize, to: usize },

    /// A partition has an empty true block, so the misclassification rate is undefined.
    #[error("undefined misclassification rate: true block {block} is empty")]
    UndefinedRate { block: usize },

    /// Input file or stream does not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// Every candidate state was filtered out.
    #[error("empty state space: {0}")]
    EmptyStateSpace(String),

    /// Label vector length does not match the state space.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// CSV (de)serialization failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of numerical procedures (as opposed to bad input).
    ///
    /// The CLI maps numerical failures to exit code 3 and everything else
    /// to exit code 2.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::MixingCapExceeded { .. }
                | Error::DegenerateEstimate(_)
                | Error::GeneratorFailed(_)
        )
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
