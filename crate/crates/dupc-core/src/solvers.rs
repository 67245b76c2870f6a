//! Dual ascent machinery: the inner primal minimizer, the dual update loop,
//! contraction-factor arithmetic, a running one-update-per-sample variant,
//! and a high-accuracy KKT solver used as the ground-truth reference.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::SolverError;
use crate::num;
use crate::problem::{ConstraintSet, PrimalDualState, SmoothnessBounds, TimeVaryingProblem};
use crate::trajectory::{TrajectoryLog, TrajectoryStep};
use crate::Result;

/// Armijo sufficient-decrease coefficient for all damped Newton loops.
const ARMIJO_C: f64 = 1e-4;
/// Step halvings before a line search gives up (reaches 2⁻⁶⁰).
const MAX_HALVINGS: usize = 60;
/// Newton iteration cap of the reference KKT solver.
const ORACLE_MAX_NEWTON: usize = 100;

/// Parameters of the dual ascent loop.
#[derive(Debug, Clone, Copy)]
pub struct DualAscentConfig {
    /// Dual stepsize `α`. Linear convergence requires `α < 2m/σ_max²`;
    /// violating that is logged as a warning, not rejected.
    pub alpha: f64,
    /// Number of dual updates to run.
    pub max_iters: usize,
    /// Gradient-norm tolerance of the inner minimization.
    pub inner_tol: f64,
    /// Newton iteration cap of the inner minimization.
    pub inner_max_iters: usize,
}

impl DualAscentConfig {
    pub fn new(alpha: f64, max_iters: usize) -> Self {
        Self { alpha, max_iters, inner_tol: 1e-10, inner_max_iters: 50 }
    }
}

/// Ground-truth optimizer pair at one time sample. The multiplier is the
/// unique representative in `im(A)`.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub x_star: DVector<f64>,
    pub lambda_star: DVector<f64>,
    /// `max(‖∇f(x*) + Aᵀλ*‖, ‖A x* − b‖)` at the returned pair.
    pub kkt_residual: f64,
}

/// Per-iteration distances to a reference solution recorded by
/// [`dual_ascent`] when a reference is supplied.
#[derive(Debug, Clone, Default)]
pub struct AscentLog {
    /// `‖λ_i − λ*‖` for `i = 0..=max_iters` (entry 0 is the initial error).
    pub dual_errors: Vec<f64>,
    /// `‖x_{i+1} − x*‖` for each completed iteration, aligned so that
    /// `primal_errors[i]` pairs with `dual_errors[i]` (the pre-update dual).
    pub primal_errors: Vec<f64>,
}

/// Damped Newton minimization of a strongly convex function given gradient
/// and Hessian callbacks. Stops when `‖g‖ ≤ tol`; the line search backtracks
/// on the merit `½‖g‖²`, whose slope along the Newton direction is `−‖g‖²`.
pub(crate) fn newton_min<G, H>(
    grad: G,
    hess: H,
    warm: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<DVector<f64>>
where
    G: Fn(&DVector<f64>) -> DVector<f64>,
    H: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut x = warm.clone();
    let mut g = grad(&x);
    let mut gsq = g.norm_squared();
    let tol_sq = tol * tol;
    let mut iters = 0;
    while gsq > tol_sq {
        if iters >= max_iters {
            return Err(SolverError::NoConvergence { residual: num::sqrt(gsq), iters });
        }
        let h = hess(&x);
        let dir = h.cholesky().ok_or(SolverError::SingularHessian)?.solve(&g);
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &x - &dir * s;
            let gc = grad(&cand);
            let gcsq = gc.norm_squared();
            if gcsq <= gsq - 2.0 * ARMIJO_C * s * gsq {
                x = cand;
                g = gc;
                gsq = gcsq;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(SolverError::NoConvergence { residual: num::sqrt(gsq), iters });
        }
        iters += 1;
    }
    Ok(x)
}

/// Minimize the partial Lagrangian `f(·; t) + λᵀ A ·` by damped Newton,
/// warm-started at `warm`. Returns the minimizer once `‖∇f(x;t) + Aᵀλ‖ ≤ tol`.
pub fn inner_primal_min(
    problem: &TimeVaryingProblem,
    lambda: &DVector<f64>,
    t: f64,
    warm: &DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> Result<DVector<f64>> {
    let at_lambda = problem.constraints().a().tr_mul(lambda);
    newton_min(
        |x| problem.grad(x, t) + &at_lambda,
        |x| problem.hessian(x, t),
        warm,
        tol,
        max_iters,
    )
}

/// One block of dual ascent rounds on the objective frozen at time `t`,
/// mutating `(x, λ)` in place. Each round performs
/// `x ← argmin f(·;t) + λᵀA·` (warm-started at the previous `x`) followed by
/// `λ ← λ + α (A x − b)`.
///
/// Every caller that advances tracker or running-solver state goes through
/// this helper, so identical configurations produce identical arithmetic.
pub(crate) fn correction_rounds(
    problem: &TimeVaryingProblem,
    t: f64,
    x: &mut DVector<f64>,
    lambda: &mut DVector<f64>,
    rounds: usize,
    alpha: f64,
    inner_tol: f64,
    inner_max_iters: usize,
) -> Result<()> {
    for _ in 0..rounds {
        *x = inner_primal_min(problem, lambda, t, x, inner_tol, inner_max_iters)?;
        let residual = problem.constraints().residual_vec(x);
        *lambda += residual * alpha;
    }
    Ok(())
}

/// Worst-case per-round contraction of the dual error under dual ascent with
/// stepsize `alpha`: `max(|1 − α σ_max²/m|, |1 − α σ_min⁺²/L|)`. Values below
/// one require `α < 2m/σ_max²`; the factor is returned as-is otherwise.
pub fn contraction_factor(alpha: f64, bounds: &SmoothnessBounds, cs: &ConstraintSet) -> f64 {
    let hi = cs.sigma_max();
    let lo = cs.sigma_min_pos();
    let a = num::abs(1.0 - alpha * hi * hi / bounds.m);
    let b = num::abs(1.0 - alpha * lo * lo / bounds.l);
    a.max(b)
}

/// Stepsize minimizing [`contraction_factor`]:
/// `α* = 2 / (σ_max²/m + σ_min⁺²/L)`. Always satisfies `α* < 2m/σ_max²`.
pub fn optimal_stepsize(bounds: &SmoothnessBounds, cs: &ConstraintSet) -> f64 {
    let hi = cs.sigma_max();
    let lo = cs.sigma_min_pos();
    2.0 / (hi * hi / bounds.m + lo * lo / bounds.l)
}

fn warn_if_not_contractive(alpha: f64, problem: &TimeVaryingProblem) {
    let rho = contraction_factor(alpha, problem.bounds(), problem.constraints());
    if rho >= 1.0 {
        let hi = problem.constraints().sigma_max();
        log::warn!(
            "dual stepsize {alpha} gives contraction factor {rho} >= 1 \
             (need alpha < 2m/sigma_max^2 = {})",
            2.0 * problem.bounds().m / (hi * hi)
        );
    }
}

/// Run `cfg.max_iters` dual ascent rounds on the objective frozen at `t`.
///
/// When `reference` is supplied, per-iteration distances to it are recorded
/// in the returned [`AscentLog`] (useful for verifying the Q-linear dual and
/// R-linear primal convergence rates).
pub fn dual_ascent(
    problem: &TimeVaryingProblem,
    t: f64,
    init: &PrimalDualState,
    cfg: &DualAscentConfig,
    reference: Option<&OracleSolution>,
) -> Result<(PrimalDualState, AscentLog)> {
    warn_if_not_contractive(cfg.alpha, problem);
    let mut x = init.x.clone();
    let mut lambda = init.lambda.clone();
    let mut log = AscentLog::default();
    if let Some(r) = reference {
        log.dual_errors.push((&lambda - &r.lambda_star).norm());
    }
    for _ in 0..cfg.max_iters {
        x = inner_primal_min(problem, &lambda, t, &x, cfg.inner_tol, cfg.inner_max_iters)?;
        if let Some(r) = reference {
            log.primal_errors.push((&x - &r.x_star).norm());
        }
        let residual = problem.constraints().residual_vec(&x);
        lambda += residual * cfg.alpha;
        if let Some(r) = reference {
            log.dual_errors.push((&lambda - &r.lambda_star).norm());
        }
    }
    Ok((PrimalDualState::new(x, lambda, init.k, t), log))
}

/// Measure distances from `(x, λ)` to the optimizer pair at time `t`,
/// warm-starting the reference solve from the previous sample's solution.
pub(crate) fn trajectory_errors(
    problem: &TimeVaryingProblem,
    t: f64,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
    tol: f64,
    warm: &mut Option<OracleSolution>,
) -> Result<(f64, f64)> {
    let ws = warm
        .as_ref()
        .map(|s| PrimalDualState::new(s.x_star.clone(), s.lambda_star.clone(), 0, t));
    let sol = solve_oracle(problem, t, tol, ws.as_ref())?;
    let pe = (x - &sol.x_star).norm();
    let de = (lambda - &sol.lambda_star).norm();
    *warm = Some(sol);
    Ok((pe, de))
}

/// Track a drifting optimizer with exactly one primal minimization and one
/// dual update per sample. `schedule` holds strictly increasing sample times;
/// the state logged at index `k` is the iterate held after the sample at
/// `schedule[k]` was processed (row 0 is the initial state).
///
/// When `oracle_tol` is given, each row also records distances to the
/// ground-truth pair at that sample time.
pub fn running_dual_ascent(
    problem: &TimeVaryingProblem,
    schedule: &[f64],
    init: &PrimalDualState,
    cfg: &DualAscentConfig,
    oracle_tol: Option<f64>,
) -> Result<TrajectoryLog> {
    if schedule.is_empty() {
        return Err(SolverError::InvalidParameter { what: "schedule must be non-empty" });
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::ZeroSamplingPeriod);
    }
    warn_if_not_contractive(cfg.alpha, problem);

    let mut x = init.x.clone();
    let mut lambda = init.lambda.clone();
    let mut log = TrajectoryLog::new();
    let mut oracle_ws: Option<OracleSolution> = None;

    let record = |k: usize,
                  t: f64,
                  x: &DVector<f64>,
                  lambda: &DVector<f64>,
                  log: &mut TrajectoryLog,
                  ws: &mut Option<OracleSolution>|
     -> Result<()> {
        let (pe, de) = match oracle_tol {
            Some(tol) => {
                let (p, d) = trajectory_errors(problem, t, x, lambda, tol, ws)?;
                (Some(p), Some(d))
            }
            None => (None, None),
        };
        log.push(TrajectoryStep {
            k,
            t,
            x: x.clone(),
            lambda: lambda.clone(),
            primal_err: pe,
            dual_err: de,
        });
        Ok(())
    };

    record(0, schedule[0], &x, &lambda, &mut log, &mut oracle_ws)?;
    for (k, &t) in schedule.iter().enumerate().skip(1) {
        correction_rounds(problem, t, &mut x, &mut lambda, 1, cfg.alpha, cfg.inner_tol, cfg.inner_max_iters)?;
        record(k, t, &x, &lambda, &mut log, &mut oracle_ws)?;
    }
    Ok(log)
}

/// Solve the problem frozen at time `t` to accuracy `tol` by damped Newton
/// on the KKT system.
///
/// The constraint block is pre-reduced to full row rank through the cached
/// SVD, so rank-deficient `A` poses no difficulty and the returned multiplier
/// is the minimum-norm representative in `im(A)` (the reduced bordered solve
/// is algebraically the minimum-norm least-squares solution of the ambient
/// KKT system). Convergence is declared on the *ambient* residual
/// `max(‖∇f(x) + Aᵀλ‖, ‖A x − b‖) ≤ tol`.
pub fn solve_oracle(
    problem: &TimeVaryingProblem,
    t: f64,
    tol: f64,
    warm: Option<&PrimalDualState>,
) -> Result<OracleSolution> {
    let cs = problem.constraints();
    let n = cs.primal_dim();
    let r = cs.rank();
    let ar = cs.a_reduced();
    let br = cs.b_reduced();

    let mut x = warm.map_or_else(|| DVector::zeros(n), |w| w.x.clone());
    let mut mu = warm.map_or_else(|| DVector::zeros(r), |w| cs.reduce_multiplier(&w.lambda));

    // Residual of the reduced KKT system plus the ambient constraint norm.
    let eval = |x: &DVector<f64>, mu: &DVector<f64>| -> (DVector<f64>, DVector<f64>, f64) {
        let rd = problem.grad(x, t) + ar.tr_mul(mu);
        let rp = ar * x - br;
        let ambient = cs.residual_norm(x);
        (rd, rp, ambient)
    };

    let (mut rd, mut rp, mut ambient) = eval(&x, &mu);
    for iters in 0..ORACLE_MAX_NEWTON {
        let res = rd.norm().max(ambient);
        if res <= tol {
            return Ok(OracleSolution {
                lambda_star: cs.lift_multiplier(&mu),
                x_star: x,
                kkt_residual: res,
            });
        }

        let h = problem.hessian(&x, t);
        let dim = n + r;
        let mut kkt = DMatrix::zeros(dim, dim);
        kkt.view_mut((0, 0), (n, n)).copy_from(&h);
        kkt.view_mut((0, n), (n, r)).copy_from(&ar.transpose());
        kkt.view_mut((n, 0), (r, n)).copy_from(ar);
        let mut rhs = DVector::zeros(dim);
        rhs.rows_mut(0, n).copy_from(&(-&rd));
        rhs.rows_mut(n, r).copy_from(&(-&rp));

        let dz = kkt.lu().solve(&rhs).ok_or(SolverError::SingularKkt)?;
        let dx = dz.rows(0, n).into_owned();
        let dmu = dz.rows(n, r).into_owned();

        // Backtrack on ψ = ½(‖rd‖² + ‖rp‖²); the Newton direction has slope −2ψ.
        let psi0 = 0.5 * (rd.norm_squared() + rp.norm_squared());
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let xc = &x + &dx * s;
            let muc = &mu + &dmu * s;
            let (rdc, rpc, ambc) = eval(&xc, &muc);
            let psic = 0.5 * (rdc.norm_squared() + rpc.norm_squared());
            if psic <= psi0 - ARMIJO_C * s * 2.0 * psi0 {
                x = xc;
                mu = muc;
                rd = rdc;
                rp = rpc;
                ambient = ambc;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(SolverError::NoConvergence { residual: res, iters });
        }
    }
    Err(SolverError::NoConvergence {
        residual: rd.norm().max(ambient),
        iters: ORACLE_MAX_NEWTON,
    })
}
