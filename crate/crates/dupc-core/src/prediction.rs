//! Prediction step: extrapolate the primal-dual pair one sampling period
//! ahead using second-order information at the current sample.
//!
//! The predicted displacement solves the equality-constrained quadratic
//! program
//!
//! ```text
//!   min_δx  ½ δxᵀ ∇xx f(x_k; t_k) δx + h ∇tx f(x_k; t_k)ᵀ δx
//!   s.t.    A δx = 0,
//! ```
//!
//! whose KKT conditions are a linearization of the drifting optimality
//! system. Two solvers are provided: an exact factorization of the KKT
//! matrix, and an iterative dual-gradient scheme whose per-round cost and
//! communication pattern decompose over nodes in separable problems.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::SolverError;
use crate::problem::{PrimalDualState, TimeVaryingProblem};
use crate::Result;

/// How the prediction displacement is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionMode {
    /// Direct factorization of the constrained-QP KKT system.
    ExactKkt,
    /// Fixed number of dual-gradient rounds on the QP (each round: one
    /// Hessian solve plus one multiplier update).
    DualGradient,
}

/// How the time derivative of the gradient is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Evaluate the mixed-derivative oracle `∇tx f`.
    Exact,
    /// First-order backward difference of the gradient in time
    /// (no mixed-derivative oracle needed).
    BackwardDifference,
}

/// Parameters of the iterative prediction solver.
#[derive(Debug, Clone, Copy)]
pub struct PredictionConfig {
    /// Dual-gradient rounds `P` (ignored by [`PredictionMode::ExactKkt`]).
    pub steps: usize,
    /// Dual stepsize `β` of the prediction QP; its contraction factor obeys
    /// the same spectrum formula as the correction stepsize.
    pub beta: f64,
    pub mode: PredictionMode,
}

/// Diagnostics of one approximate prediction solve.
#[derive(Debug, Clone, Copy)]
pub struct PredictionLog {
    /// `‖A δx‖` at the returned displacement; the exact QP solution would
    /// make this zero.
    pub constraint_violation: f64,
}

/// Tracks the previous sample's primal point and time so that the
/// backward-difference derivative can be formed without a mixed oracle.
///
/// The first sample has no predecessor, so [`MixedGradientCache::is_warm`]
/// is false until [`MixedGradientCache::advance`] has been called once.
#[derive(Debug, Clone, Default)]
pub struct MixedGradientCache {
    prev_t: Option<f64>,
}

impl MixedGradientCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Whether a previous sample time is available.
    pub fn is_warm(&self) -> bool {
        self.prev_t.is_some()
    }

    pub fn prev_t(&self) -> Option<f64> {
        self.prev_t
    }

    /// Record that the sample at time `t` has been processed.
    pub fn advance(&mut self, t: f64) {
        self.prev_t = Some(t);
    }
}

/// First-order backward-difference approximation of `∇tx f(x; t)`:
/// `(∇x f(x; t) − ∇x f(x; t_prev)) / (t − t_prev)`, both gradients taken at
/// the same point `x`. The approximation error is bounded by `(C₃/2)·h` for
/// objectives whose `∇ttx f` is bounded by `C₃`.
pub fn backward_diff_mixed_grad(
    problem: &TimeVaryingProblem,
    x: &DVector<f64>,
    t: f64,
    t_prev: f64,
) -> Result<DVector<f64>> {
    let h = t - t_prev;
    if h <= 0.0 {
        return Err(SolverError::ZeroSamplingPeriod);
    }
    Ok((problem.grad(x, t) - problem.grad(x, t_prev)) / h)
}

/// Solve the prediction QP exactly through its KKT system and return the
/// displacement pair `(δx, δλ)` with `δλ ∈ im(A)`.
///
/// `mixed` is the (exact or approximated) value of `∇tx f(x_k; t_k)`.
pub fn exact_prediction_kkt(
    problem: &TimeVaryingProblem,
    state: &PrimalDualState,
    h: f64,
    mixed: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if h <= 0.0 {
        return Err(SolverError::ZeroSamplingPeriod);
    }
    let cs = problem.constraints();
    let n = cs.primal_dim();
    let r = cs.rank();
    let ar = cs.a_reduced();
    let q = problem.hessian(&state.x, state.t);

    // Bordered system on the rank-reduced constraint block:
    //   [ Q   Ãᵀ ] [δx]   [ −h·c ]
    //   [ Ã   0  ] [δμ] = [   0  ]
    let dim = n + r;
    let mut kkt = DMatrix::zeros(dim, dim);
    kkt.view_mut((0, 0), (n, n)).copy_from(&q);
    kkt.view_mut((0, n), (n, r)).copy_from(&ar.transpose());
    kkt.view_mut((n, 0), (r, n)).copy_from(ar);
    let mut rhs = DVector::zeros(dim);
    rhs.rows_mut(0, n).copy_from(&(mixed * (-h)));

    let sol = kkt.lu().solve(&rhs).ok_or(SolverError::SingularKkt)?;
    let dx = sol.rows(0, n).into_owned();
    let dmu = sol.rows(n, r).into_owned();
    Ok((dx, cs.lift_multiplier(&dmu)))
}

/// Approximate the prediction QP with `cfg.steps` dual-gradient rounds and
/// return `(δx, δλ, log)`.
///
/// Starting from `(δx₀, δλ₀) = (0, 0)`, round `p` solves
/// `Q δx_{p+1} = −(h·c + Aᵀ δλ_p)` and updates
/// `δλ_{p+1} = δλ_p + β·A δx_{p+1}`. The Hessian is factorized once and the
/// factorization reused; `h·c` is likewise formed once. With zero rounds the
/// displacement pair is identically zero.
pub fn approx_prediction(
    problem: &TimeVaryingProblem,
    state: &PrimalDualState,
    h: f64,
    mixed: &DVector<f64>,
    cfg: &PredictionConfig,
) -> Result<(DVector<f64>, DVector<f64>, PredictionLog)> {
    if h <= 0.0 {
        return Err(SolverError::ZeroSamplingPeriod);
    }
    let cs = problem.constraints();
    let a = cs.a();
    let q = problem.hessian(&state.x, state.t);
    let chol: Cholesky<f64, Dyn> = q.cholesky().ok_or(SolverError::SingularHessian)?;
    let hc = mixed * h;

    let mut dx = DVector::zeros(cs.primal_dim());
    let mut dlam = DVector::zeros(cs.dual_dim());
    for _ in 0..cfg.steps {
        dx = chol.solve(&(-&hc - a.tr_mul(&dlam)));
        dlam += a * &dx * cfg.beta;
    }
    let violation = (a * &dx).norm();
    Ok((dx, dlam, PredictionLog { constraint_violation: violation }))
}
