use crate::dynamics::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input left the mathematical domain of an operation: a nonpositive or
    /// non-finite price component, a negative weight, an FD step wider than
    /// the distance to the orthant boundary, and the like.
    #[error("domain error: {reason}")]
    Domain { reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Iterative solve stopped at the iteration cap without meeting its
    /// residual target.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Vector too short to renormalize (norm below 1e-14).
    #[error("degenerate vector: norm {norm:.3e} too small to renormalize")]
    DegenerateVector { norm: f64 },

    /// A point offered as an equilibrium has excess demand above tolerance.
    #[error("not an equilibrium: |xi| = {xi_norm:.3e} exceeds {tol:.3e}")]
    NotAnEquilibrium { xi_norm: f64, tol: f64 },

    /// Decay-rate fit requested on a trajectory that is not converging.
    #[error("trajectory is not converging: {detail}")]
    NotConverging { detail: String },

    /// A trajectory stepped outside the positive orthant (or produced a
    /// non-finite state). Carries everything integrated up to the failure.
    #[error("price left the positive orthant at step {step}")]
    OrthantExit { step: usize, trajectory: Box<Trajectory> },

    /// Two independent evaluations of the same quantity disagree beyond
    /// tolerance; indicates a numerical breakdown, not a caller mistake.
    #[error("numerical inconsistency: {detail}")]
    NumericalInconsistency { detail: String },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(reason: impl Into<String>) -> Self {
        Error::Domain { reason: reason.into() }
    }

    pub fn invalid(reason: impl Into<String>) -> Self {
        Error::InvalidConfig { reason: reason.into() }
    }
}
