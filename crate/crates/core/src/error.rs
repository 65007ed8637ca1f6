use alloc::boxed::Box;

use crate::steady_state::SteadyState;

/// Why the imaginary-time iteration gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StallReason {
    /// `max_iter` steps were taken without meeting both tolerances.
    MaxIterations,
    /// The per-step change stopped decreasing for a whole stall window.
    Stagnated,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("singular parameters: cavity denominator Delta_C - u0*B + i*kappa vanishes")]
    SingularParameters,

    #[error("no self-organization threshold: u0 - 2*Delta_C must be positive")]
    NoTransition,

    #[error("argument outside the domain of the formula: {0}")]
    Domain(&'static str),

    #[error("steady state did not converge ({reason:?}) after {} iterations, residual {}", .state.iterations, .state.residual)]
    NotConverged {
        state: Box<SteadyState>,
        reason: StallReason,
    },

    #[error("steady state is not converged; refusing to linearize around it")]
    StateNotConverged,

    #[error("steady-state wavefunction is not real after global phase fixing (max |Im| = {0:e})")]
    NonRealState(f64),

    #[error("eigensolver failed to converge at index {index} (matrix norm {norm:e})")]
    EigenFailure { index: usize, norm: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(&'static str),

    #[error("numerical degeneracy: mode {index} with omega = {re:e}{im:+e}i has vanishing symplectic norm")]
    NumericalDegeneracy { index: usize, re: f64, im: f64 },
}
