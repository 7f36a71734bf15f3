use thiserror::Error;

/// Errors raised by the majorant calculus, the solver and the certification checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set on which an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The majorant model violates one of its hypotheses.
    #[error("model error: {0}")]
    Model(String),

    /// A function evaluation produced NaN or an infinity where a finite value was required.
    #[error("non-finite value {value} at t = {at}")]
    NonFinite { at: f64, value: f64 },

    /// The scalar majorant sequence left the interval (0, r) or stopped decreasing.
    #[error("majorant sequence broke down at k = {k}: t = {t} (radius {radius})")]
    Iteration { k: usize, t: f64, radius: f64 },

    /// Malformed Lipschitz density or input table.
    #[error("representation error: {0}")]
    Representation(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative inner method ran out of steps.
    #[error("{method} did not converge after {iterations} iterations")]
    NoConvergence { method: &'static str, iterations: usize },

    /// A rate diagnostic needs more iterations than the trace holds.
    #[error("need at least {needed} iterations, trace has {available}")]
    InsufficientIterations { needed: usize, available: usize },

    /// Unknown identifier for a registry entry or built-in model.
    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(at: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { at, value })
    }
}
