//! The sampled-time tracking loop: prediction-correction (ADuPC) and the
//! correction-only baseline strategies, plus the wall-clock budget
//! calculator that converts a sampling period into per-step iteration
//! counts.

use nalgebra::DVector;

use crate::error::SolverError;
use crate::prediction::{
    approx_prediction, backward_diff_mixed_grad, exact_prediction_kkt, DerivativeMode,
    MixedGradientCache, PredictionConfig, PredictionMode,
};
use crate::problem::{PrimalDualState, TimeVaryingProblem};
use crate::solvers::{correction_rounds, trajectory_errors, OracleSolution};
use crate::trajectory::{TrajectoryLog, TrajectoryStep};
use crate::Result;

/// Per-step update policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Prediction (P dual-gradient rounds or an exact KKT solve) followed by
    /// C correction rounds on the newly sampled objective.
    Adupc,
    /// C correction rounds per sample, nothing else.
    CorrectionOnly,
    /// C delivered correction rounds, then C′ extra rounds on the same
    /// objective whose result is carried (not delivered) to the next step.
    CorrectionPlusExtra,
    /// The entire per-step budget spent on delivered corrections (C″ rounds).
    TotalCorrection,
}

impl Strategy {
    /// Stable machine-readable name used in logs and CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Adupc => "adupc",
            Strategy::CorrectionOnly => "correction_only",
            Strategy::CorrectionPlusExtra => "correction_plus_extra",
            Strategy::TotalCorrection => "total_correction",
        }
    }
}

/// Full configuration of one tracking run.
#[derive(Debug, Clone)]
pub struct TrackerConfig {
    /// Correction dual stepsize α.
    pub alpha: f64,
    /// Prediction dual stepsize β.
    pub beta: f64,
    /// Prediction rounds P (ignored by the exact-KKT prediction mode and by
    /// the baselines).
    pub prediction_steps: usize,
    /// Correction rounds C (the total budget C″ for
    /// [`Strategy::TotalCorrection`]).
    pub correction_steps: usize,
    /// Extra carried rounds C′ ([`Strategy::CorrectionPlusExtra`] only).
    pub extra_correction_steps: usize,
    pub strategy: Strategy,
    pub prediction_mode: PredictionMode,
    pub derivative_mode: DerivativeMode,
    /// Sampling period h.
    pub h: f64,
    /// Number of samples to process; the log gains `k_max + 1` rows.
    pub k_max: usize,
    /// Gradient tolerance of each inner primal minimization.
    pub inner_tol: f64,
    /// Newton cap of each inner primal minimization.
    pub inner_max_iters: usize,
}

impl TrackerConfig {
    /// ADuPC configuration with exact derivatives, dual-gradient prediction,
    /// and default inner-solver settings.
    pub fn new(
        alpha: f64,
        beta: f64,
        prediction_steps: usize,
        correction_steps: usize,
        h: f64,
        k_max: usize,
    ) -> Self {
        Self {
            alpha,
            beta,
            prediction_steps,
            correction_steps,
            extra_correction_steps: 0,
            strategy: Strategy::Adupc,
            prediction_mode: PredictionMode::DualGradient,
            derivative_mode: DerivativeMode::Exact,
            h,
            k_max,
            inner_tol: 1e-10,
            inner_max_iters: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h <= 0.0 || !self.h.is_finite() {
            return Err(SolverError::ZeroSamplingPeriod);
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(SolverError::InvalidParameter { what: "alpha must be finite and >= 0" });
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(SolverError::InvalidParameter { what: "beta must be finite and >= 0" });
        }
        if self.inner_tol <= 0.0 {
            return Err(SolverError::InvalidParameter { what: "inner_tol must be positive" });
        }
        if self.inner_max_iters == 0 {
            return Err(SolverError::InvalidParameter { what: "inner_max_iters must be >= 1" });
        }
        Ok(())
    }
}

/// Which strategy produced a log, with the iteration counts actually used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunMeta {
    pub strategy: Strategy,
    pub prediction_steps: usize,
    pub correction_steps: usize,
    pub extra_correction_steps: usize,
}

/// A completed tracking run: the trajectory plus its provenance.
#[derive(Debug, Clone)]
pub struct TrackerRun {
    pub log: TrajectoryLog,
    pub meta: RunMeta,
}

fn meta_for(cfg: &TrackerConfig) -> RunMeta {
    let (p, c, ce) = match cfg.strategy {
        Strategy::Adupc => (cfg.prediction_steps, cfg.correction_steps, 0),
        Strategy::CorrectionOnly => (0, cfg.correction_steps, 0),
        Strategy::CorrectionPlusExtra => {
            (0, cfg.correction_steps, cfg.extra_correction_steps)
        }
        Strategy::TotalCorrection => (0, cfg.correction_steps, 0),
    };
    RunMeta {
        strategy: cfg.strategy,
        prediction_steps: p,
        correction_steps: c,
        extra_correction_steps: ce,
    }
}

struct ErrorProbe<'a> {
    tol: Option<f64>,
    warm: Option<OracleSolution>,
    problem: &'a TimeVaryingProblem,
}

impl<'a> ErrorProbe<'a> {
    fn new(problem: &'a TimeVaryingProblem, tol: Option<f64>) -> Self {
        Self { tol, warm: None, problem }
    }

    fn measure(
        &mut self,
        t: f64,
        x: &DVector<f64>,
        lambda: &DVector<f64>,
    ) -> Result<(Option<f64>, Option<f64>)> {
        match self.tol {
            Some(tol) => {
                let (p, d) = trajectory_errors(self.problem, t, x, lambda, tol, &mut self.warm)?;
                Ok((Some(p), Some(d)))
            }
            None => Ok((None, None)),
        }
    }
}

fn push_row(
    log: &mut TrajectoryLog,
    k: usize,
    t: f64,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
    errs: (Option<f64>, Option<f64>),
) {
    log.push(TrajectoryStep {
        k,
        t,
        x: x.clone(),
        lambda: lambda.clone(),
        primal_err: errs.0,
        dual_err: errs.1,
    });
}

/// Run the prediction-correction tracker over `cfg.k_max` samples starting
/// from `init` (logged as row 0, at time `init.t`).
///
/// Each step predicts the next optimizer pair from second-order information
/// at the current sample — using the exact mixed derivative or its backward
/// difference per `cfg.derivative_mode` — and then applies
/// `cfg.correction_steps` dual ascent rounds on the newly sampled objective.
/// In backward-difference mode the first step has no predecessor sample, so
/// its prediction displacement is zero. With dual-gradient prediction and
/// `P = 0` the prediction phase is skipped outright, which makes the run
/// arithmetic-identical to the correction-only baseline.
///
/// When `oracle_tol` is given, every logged row carries distances to the
/// ground-truth optimizer pair at that row's sample time.
pub fn run_adupc(
    problem: &TimeVaryingProblem,
    cfg: &TrackerConfig,
    init: &PrimalDualState,
    oracle_tol: Option<f64>,
) -> Result<TrackerRun> {
    if cfg.strategy != Strategy::Adupc {
        return Err(SolverError::InvalidParameter {
            what: "run_adupc requires the adupc strategy",
        });
    }
    run_tracker(problem, cfg, init, oracle_tol)
}

/// Run one of the correction-only baselines (every strategy except
/// [`Strategy::Adupc`]).
///
/// `correction_plus_extra` logs the *delivered* iterate (after the first C
/// rounds) while carrying the post-extra-round iterate to the next step;
/// the other baselines log the iterate they carry.
pub fn run_baseline(
    problem: &TimeVaryingProblem,
    cfg: &TrackerConfig,
    init: &PrimalDualState,
    oracle_tol: Option<f64>,
) -> Result<TrackerRun> {
    if cfg.strategy == Strategy::Adupc {
        return Err(SolverError::InvalidParameter {
            what: "run_baseline requires a non-adupc strategy",
        });
    }
    run_tracker(problem, cfg, init, oracle_tol)
}

fn run_tracker(
    problem: &TimeVaryingProblem,
    cfg: &TrackerConfig,
    init: &PrimalDualState,
    oracle_tol: Option<f64>,
) -> Result<TrackerRun> {
    cfg.validate()?;
    let t0 = init.t;
    let mut x = init.x.clone();
    let mut lambda = init.lambda.clone();
    let mut log = TrajectoryLog::new();
    let mut probe = ErrorProbe::new(problem, oracle_tol);
    let mut bd_cache = MixedGradientCache::new();

    let e0 = probe.measure(t0, &x, &lambda)?;
    push_row(&mut log, 0, t0, &x, &lambda, e0);

    for k in 0..cfg.k_max {
        let t = t0 + k as f64 * cfg.h;
        let t_next = t0 + (k + 1) as f64 * cfg.h;

        match cfg.strategy {
            Strategy::Adupc => {
                let mixed = match cfg.derivative_mode {
                    DerivativeMode::Exact => Some(problem.mixed_grad(&x, t)?),
                    DerivativeMode::BackwardDifference => match bd_cache.prev_t() {
                        Some(tp) => Some(backward_diff_mixed_grad(problem, &x, t, tp)?),
                        // First sample: no predecessor, predict no drift.
                        None => None,
                    },
                };
                bd_cache.advance(t);
                if let Some(mixed) = mixed {
                    let state = PrimalDualState::new(x.clone(), lambda.clone(), k, t);
                    let delta = match cfg.prediction_mode {
                        PredictionMode::ExactKkt => {
                            Some(exact_prediction_kkt(problem, &state, cfg.h, &mixed)?)
                        }
                        PredictionMode::DualGradient if cfg.prediction_steps > 0 => {
                            let pcfg = PredictionConfig {
                                steps: cfg.prediction_steps,
                                beta: cfg.beta,
                                mode: cfg.prediction_mode,
                            };
                            let (dx, dl, _) =
                                approx_prediction(problem, &state, cfg.h, &mixed, &pcfg)?;
                            Some((dx, dl))
                        }
                        PredictionMode::DualGradient => None,
                    };
                    if let Some((dx, dl)) = delta {
                        x += dx;
                        lambda += dl;
                    }
                }
                correction_rounds(
                    problem,
                    t_next,
                    &mut x,
                    &mut lambda,
                    cfg.correction_steps,
                    cfg.alpha,
                    cfg.inner_tol,
                    cfg.inner_max_iters,
                )?;
                let e = probe.measure(t_next, &x, &lambda)?;
                push_row(&mut log, k + 1, t_next, &x, &lambda, e);
            }
            Strategy::CorrectionOnly | Strategy::TotalCorrection => {
                correction_rounds(
                    problem,
                    t_next,
                    &mut x,
                    &mut lambda,
                    cfg.correction_steps,
                    cfg.alpha,
                    cfg.inner_tol,
                    cfg.inner_max_iters,
                )?;
                let e = probe.measure(t_next, &x, &lambda)?;
                push_row(&mut log, k + 1, t_next, &x, &lambda, e);
            }
            Strategy::CorrectionPlusExtra => {
                correction_rounds(
                    problem,
                    t_next,
                    &mut x,
                    &mut lambda,
                    cfg.correction_steps,
                    cfg.alpha,
                    cfg.inner_tol,
                    cfg.inner_max_iters,
                )?;
                // The delivered iterate is what gets logged and measured …
                let e = probe.measure(t_next, &x, &lambda)?;
                push_row(&mut log, k + 1, t_next, &x, &lambda, e);
                // … while the extra rounds refine the carried state on the
                // same objective.
                correction_rounds(
                    problem,
                    t_next,
                    &mut x,
                    &mut lambda,
                    cfg.extra_correction_steps,
                    cfg.alpha,
                    cfg.inner_tol,
                    cfg.inner_max_iters,
                )?;
            }
        }
    }
    Ok(TrackerRun { log, meta: meta_for(cfg) })
}

/// Wall-clock cost model used to convert a sampling period into iteration
/// budgets: per-round correction and prediction costs, a fixed per-step
/// prediction overhead (derivative evaluation and factorization), and the
/// fractions of the period granted to correction (`r₁`) and prediction or
/// extra correction (`r₂`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimeBudget {
    /// Seconds per correction round (t_C).
    pub correction_cost: f64,
    /// Seconds per prediction round (t_P).
    pub prediction_cost: f64,
    /// Fixed prediction setup cost per step (t̄).
    pub overhead: f64,
    /// Fraction r₁ of the period spent on delivered corrections.
    pub correction_fraction: f64,
    /// Fraction r₂ spent on prediction (or on extra corrections).
    pub prediction_fraction: f64,
}

impl RuntimeBudget {
    pub fn new(
        correction_cost: f64,
        prediction_cost: f64,
        overhead: f64,
        correction_fraction: f64,
        prediction_fraction: f64,
    ) -> Result<Self> {
        let b = Self {
            correction_cost,
            prediction_cost,
            overhead,
            correction_fraction,
            prediction_fraction,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.correction_cost > 0.0 && self.prediction_cost > 0.0 && self.overhead > 0.0) {
            return Err(SolverError::InvalidParameter {
                what: "per-operation costs must be positive",
            });
        }
        let r1 = self.correction_fraction;
        let r2 = self.prediction_fraction;
        if !(0.0 < r1 && r1 <= 1.0 && 0.0 < r2 && r2 <= 1.0) {
            return Err(SolverError::InvalidParameter {
                what: "budget fractions must lie in (0, 1]",
            });
        }
        if r1 + r2 > 1.0 {
            return Err(SolverError::InvalidParameter {
                what: "budget fractions must satisfy r1 + r2 <= 1",
            });
        }
        Ok(())
    }
}

/// Iteration budgets affordable within one sampling period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetAllocation {
    /// `P = ⌊(r₂·h − t̄)/t_P⌋`, clamped at zero.
    pub prediction_steps: usize,
    /// `C = ⌊r₁·h/t_C⌋`.
    pub correction_steps: usize,
    /// `C′ = ⌊r₂·h/t_C⌋`.
    pub extra_correction_steps: usize,
    /// `C″ = ⌊h/t_C⌋` (whole period spent on corrections).
    pub total_correction_steps: usize,
}

impl BudgetAllocation {
    /// A schedule with zero delivered corrections cannot track at all.
    pub fn is_feasible(&self) -> bool {
        self.correction_steps >= 1
    }
}

fn floor_nonneg(v: f64) -> usize {
    if v <= 0.0 {
        0
    } else {
        v as usize
    }
}

/// Split the sampling period `h` into per-step iteration budgets under the
/// given cost model. Floors may be zero; a zero correction budget marks the
/// period infeasible (see [`BudgetAllocation::is_feasible`]) but is reported
/// rather than rejected.
pub fn compute_budget(budget: &RuntimeBudget, h: f64) -> Result<BudgetAllocation> {
    budget.validate()?;
    if h <= 0.0 || !h.is_finite() {
        return Err(SolverError::ZeroSamplingPeriod);
    }
    let r1 = budget.correction_fraction;
    let r2 = budget.prediction_fraction;
    Ok(BudgetAllocation {
        prediction_steps: floor_nonneg((r2 * h - budget.overhead) / budget.prediction_cost),
        correction_steps: floor_nonneg(r1 * h / budget.correction_cost),
        extra_correction_steps: floor_nonneg(r2 * h / budget.correction_cost),
        total_correction_steps: floor_nonneg(h / budget.correction_cost),
    })
}
