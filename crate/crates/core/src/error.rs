//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Enumeration request beyond the desk-scale capacity guard.
    #[error("capacity guard: {what} = {value} exceeds supported maximum {max}")]
    CapacityExceeded {
        what: &'static str,
        value: usize,
        max: usize,
    },

    /// The Jensen-bound matrix is singular (or numerically so); carries the
    /// condition estimate so callers can fall back to the asymptotic
    /// probabilities.
    #[error("matrix A is singular (condition estimate {cond:.3e})")]
    SingularMatrix { cond: f64 },

    /// Monte Carlo estimate requested with too few samples for a meaningful
    /// standard error.
    #[error("at least {min} Monte Carlo samples required, got {got}")]
    NotEnoughSamples { got: usize, min: usize },

    /// Probability vector invalid (negative entry, wrong length, bad sum).
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    /// All mixture weights are zero.
    #[error("mixture has no component with positive probability")]
    EmptyMixture,

    /// A SAP with a null assignment was used where an active SAP is required.
    #[error("SAP {sap} has a null assignment in this codebook")]
    DroppedSap { sap: usize },

    /// SAP-to-leaf assignment is not injective or does not cover the leaves.
    #[error("invalid SAP-to-leaf assignment: {0}")]
    InvalidAssignment(String),

    /// Waterfilling over a set of all-zero gains.
    #[error("waterfilling requires at least one positive gain")]
    AllGainsZero,

    /// Malformed serialized input (JSON/CSV channel state, profile string).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
