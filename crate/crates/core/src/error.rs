use thiserror::Error;

/// Errors produced by the solvers and verifiers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SteklovError {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input (bad warp string, m out of range, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The ODE integrator could not reach the end point.
    #[error("solver failure at r = {radius:.6e}: {reason}")]
    SolverFailure { radius: f64, reason: String },

    /// Quadrature non-convergence or a degenerate linear combination.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The slope has the same sign at both ends of a transition bracket.
    #[error("bracket [{lo}, {hi}] does not enclose a slope sign change (slopes {slope_lo:.3e}, {slope_hi:.3e})")]
    Bracket {
        lo: f64,
        hi: f64,
        slope_lo: f64,
        slope_hi: f64,
    },

    /// The random warp sampler ran out of attempts.
    #[error("sampling budget exhausted after {attempts} attempts ({accepted} accepted)")]
    Sampling { attempts: usize, accepted: usize },
}

impl SteklovError {
    /// Short machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            SteklovError::Domain(_) => "domain",
            SteklovError::InvalidInput(_) => "invalid_input",
            SteklovError::SolverFailure { .. } => "solver_failure",
            SteklovError::Numeric(_) => "numeric",
            SteklovError::Bracket { .. } => "bracket",
            SteklovError::Sampling { .. } => "sampling",
        }
    }
}

pub type Result<T> = std::result::Result<T, SteklovError>;
