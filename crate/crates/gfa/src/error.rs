//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GfaError>;

#[derive(Debug, Error)]
pub enum GfaError {
    /// A field was evaluated exactly at a particle center.
    #[error("field evaluated at a particle center (particle {index})")]
    CoincidentPoint { index: usize },

    /// The nearest-max gradient is undefined when two particles are exactly
    /// equidistant from the evaluation point.
    #[error("nearest-max gradient tie between particles {a} and {b}")]
    NearestMaxTie { a: usize, b: usize },

    /// The requested operation is not defined for this potential or dimension.
    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    /// A precondition on user input or configuration was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Growth gave up on a particle after exhausting its stall-resample budget.
    #[error("growth aborted at particle {particle} after {attempts} stalled attempts")]
    GrowthAborted { particle: usize, attempts: u32 },

    /// A launch failed outright (budget, escape, or numeric trouble) while
    /// growing — unlike a stall, this is not survivable by resampling.
    #[error("flow launch for particle {particle} failed: {what}")]
    FlowFailed { particle: usize, what: String },

    /// A Monte Carlo run exceeded its failed-launch budget.
    #[error("{failures} failed launches out of {samples} samples exceeds the failure budget")]
    TooManyFailures { failures: u64, samples: u64 },

    /// A scaling-exponent fit had no usable signal.
    #[error("degenerate exponent fit: {0}")]
    DegenerateFit(String),

    /// A structured input file failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
