use core::fmt;

/// Failure modes shared across the solver stack.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// Constraint matrix is identically zero (or has a zero dimension).
    ZeroMatrix,
    /// Right-hand side is not in the image of the constraint matrix.
    InfeasibleRhs {
        /// Norm of the least-squares residual `‖A·A⁺b − b‖`.
        residual: f64,
    },
    /// An iterative solve stalled before reaching its tolerance.
    NoConvergence {
        /// Residual norm at the point the solve gave up.
        residual: f64,
        /// Iterations performed.
        iters: usize,
    },
    /// The KKT system could not be factorized.
    SingularKkt,
    /// The objective Hessian could not be factorized.
    SingularHessian,
    /// A sampling period (or time difference) was not strictly positive.
    ZeroSamplingPeriod,
    /// The communication graph is not connected.
    DisconnectedGraph,
    /// Exact time derivatives were requested but the problem carries no
    /// mixed-derivative oracle.
    MissingMixedGradient,
    /// The tracking contraction `τ = γ₁ + γ₂ h` is not below one, so no
    /// finite steady-state guarantee exists for this configuration.
    NotContractive {
        /// The offending contraction value.
        tau: f64,
    },
    /// Operand dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// A configuration value is out of its admissible range.
    InvalidParameter { what: &'static str },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroMatrix => write!(f, "constraint matrix is zero"),
            Self::InfeasibleRhs { residual } => write!(
                f,
                "right-hand side is outside the image of the constraint matrix (residual {residual:.3e})"
            ),
            Self::NoConvergence { residual, iters } => write!(
                f,
                "iteration stalled after {iters} steps (residual {residual:.3e})"
            ),
            Self::SingularKkt => write!(f, "KKT system is singular"),
            Self::SingularHessian => write!(f, "objective Hessian is singular"),
            Self::ZeroSamplingPeriod => write!(f, "sampling period must be positive"),
            Self::DisconnectedGraph => write!(f, "communication graph is not connected"),
            Self::MissingMixedGradient => {
                write!(f, "problem has no mixed-derivative oracle; use backward differences")
            }
            Self::NotContractive { tau } => {
                write!(f, "tracking contraction is not below one (tau = {tau:.6})")
            }
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Self::InvalidParameter { what } => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for SolverError {}
