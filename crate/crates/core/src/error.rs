use thiserror::Error;

/// Errors shared by the numerical modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A recurrence or summation was asked to run past its stability envelope.
    #[error("stability envelope exceeded: {0}")]
    StabilityEnvelope(String),

    /// The requested oscillatory integral cannot be resolved within the
    /// configured quadrature budget.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A regularization step failed to produce a convergent integral.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// Two discretized operators live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The discretized operator I + K is numerically singular.
    #[error("singular determinant: {0}")]
    Singular(String),

    /// An iterative solver did not converge within its sweep cap.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A closed-form prediction was requested outside its hypotheses.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// Invalid configuration values.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
