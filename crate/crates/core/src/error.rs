//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A numeric argument was non-finite or otherwise outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested analysis does not apply to these parameters; the
    /// message names the failing condition.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The interior equilibrium has a vanishing denominator (S = 0).
    #[error("equilibrium undefined: {0}")]
    UndefinedEquilibrium(String),

    /// The integration step does not divide the delay, or is too coarse.
    #[error("invalid step: {0}")]
    InvalidStep(String),

    /// A simulated state exceeded the blow-up limit.
    #[error("solution diverged at t = {t}: component magnitude exceeded {limit:e}")]
    Divergence { t: f64, limit: f64 },

    /// The rightmost characteristic root has the same real-part sign at
    /// both ends of the bracketing interval.
    #[error("no crossing detected on [{tau_lo}, {tau_hi}]: {reason}")]
    NoCrossing {
        tau_lo: f64,
        tau_hi: f64,
        reason: String,
    },

    /// The point handed to a crossing-direction query is not actually a
    /// characteristic root.
    #[error("not a characteristic root: residual {residual:e} exceeds tolerance {tol:e}")]
    InvalidCrossing { residual: f64, tol: f64 },

    /// Root finding produced no usable result; diagnostics in the message.
    #[error("root search failed: {0}")]
    RootSearch(String),

    /// An internal consistency condition was violated.
    #[error("internal error: {0}")]
    Internal(String),
}
