//! Closed-form constants and error bounds for the prediction-correction
//! tracker: optimizer drift rates, the problem-specific Δ constants, the
//! contraction condition (γ₁, γ₂, h_max, τ), asymptotic tracking-error
//! bounds for exact and backward-difference derivatives, the error formulas
//! of the correction-only baselines, and the perturbation bounds of an
//! equality-constrained quadratic program.
//!
//! Everything here is a total, stateless function of its numeric inputs.

use crate::error::SolverError;
use crate::num;
use crate::prediction::DerivativeMode;
use crate::problem::{ConstraintSet, SmoothnessBounds};
use crate::Result;

fn powi(base: f64, exp: usize) -> f64 {
    num::powi(base, exp as u32)
}

/// Problem-specific constants combining curvature, constraint conditioning,
/// and the temporal-variability bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deltas {
    /// Sensitivity of the primal optimizer to gradient perturbations:
    /// `(κ_f κ_A² + 1)/m`.
    pub delta1: f64,
    /// Sensitivity of the dual optimizer: `κ_f κ_A / σ_min⁺`.
    pub delta2: f64,
    /// Second-order drift constant:
    /// `C₁C₀²Δ₁²/2 + Δ₁C₂C₀ + C₃/2`.
    pub delta3: f64,
    /// Curvature-coupling constant: `Δ₁C₁C₀ + C₂`.
    pub delta4: f64,
}

/// Compute the Δ constants from the smoothness bounds and the constraint
/// spectrum.
pub fn deltas(bounds: &SmoothnessBounds, cs: &ConstraintSet) -> Deltas {
    let kf = bounds.kappa_f();
    let ka = cs.kappa_a();
    let delta1 = (kf * ka * ka + 1.0) / bounds.m;
    let delta2 = kf * ka / cs.sigma_min_pos();
    let delta3 = bounds.c1 * bounds.c0 * bounds.c0 * delta1 * delta1 / 2.0
        + delta1 * bounds.c2 * bounds.c0
        + bounds.c3 / 2.0;
    let delta4 = delta1 * bounds.c1 * bounds.c0 + bounds.c2;
    Deltas { delta1, delta2, delta3, delta4 }
}

/// Enlarged drift constant used when the time derivative of the gradient is
/// replaced by its backward difference: `Δ̃₃ = Δ₃ + h·C₃/2`.
pub fn delta3_tilde(delta3: f64, c3: f64, h: f64) -> f64 {
    delta3 + h * c3 / 2.0
}

/// Per-sample worst-case movement of the optimizer pair:
/// `(primal, dual) = (Δ₁·C₀·h, Δ₂·C₀·h)`.
pub fn drift_bounds(bounds: &SmoothnessBounds, cs: &ConstraintSet, h: f64) -> (f64, f64) {
    let d = deltas(bounds, cs);
    (d.delta1 * bounds.c0 * h, d.delta2 * bounds.c0 * h)
}

/// Uniform drift constant dominating both components:
/// `K = max(Δ₁, Δ₂)·C₀·h`.
pub fn drift_constant_k(bounds: &SmoothnessBounds, cs: &ConstraintSet, h: f64) -> f64 {
    let d = deltas(bounds, cs);
    d.delta1.max(d.delta2) * bounds.c0 * h
}

/// Contraction diagnostics of the prediction-correction loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceConditions {
    /// `γ₁ = ϱ_C^C (2ϱ_P^P + 1)`; the loop contracts only if `γ₁ < 1`.
    pub gamma1: f64,
    /// `γ₂ = (κ_f κ_A²/m)·Δ₄·ϱ_C^{C−1}(ϱ_P^P + 1)`: the slope of the
    /// sampling-period penalty.
    pub gamma2: f64,
    /// Largest admissible sampling period `(1 − γ₁)/γ₂` (infinite when
    /// `γ₂ = 0`; nonpositive when `γ₁ ≥ 1`).
    pub h_max: f64,
    /// Whether `γ₁ < 1`. When false the loop cannot contract at any `h` and
    /// `h_max` is meaningless.
    pub contractive: bool,
}

/// Evaluate the contraction condition for `P` prediction rounds and `C ≥ 1`
/// correction rounds with per-round factors `ϱ_P`, `ϱ_C`.
pub fn convergence_conditions(
    rho_p: f64,
    rho_c: f64,
    p_steps: usize,
    c_steps: usize,
    bounds: &SmoothnessBounds,
    cs: &ConstraintSet,
) -> Result<ConvergenceConditions> {
    if c_steps == 0 {
        return Err(SolverError::InvalidParameter {
            what: "convergence conditions require at least one correction round",
        });
    }
    if !(0.0..1.0).contains(&rho_p) || !(0.0..1.0).contains(&rho_c) {
        return Err(SolverError::InvalidParameter {
            what: "contraction factors must lie in [0, 1)",
        });
    }
    let rp = powi(rho_p, p_steps);
    let rc = powi(rho_c, c_steps);
    let gamma1 = rc * (2.0 * rp + 1.0);
    let kf = bounds.kappa_f();
    let ka = cs.kappa_a();
    let d = deltas(bounds, cs);
    let gamma2 = (kf * ka * ka / bounds.m) * d.delta4 * powi(rho_c, c_steps - 1) * (rp + 1.0);
    let h_max = if gamma2 == 0.0 { f64::INFINITY } else { (1.0 - gamma1) / gamma2 };
    Ok(ConvergenceConditions { gamma1, gamma2, h_max, contractive: gamma1 < 1.0 })
}

/// Per-step contraction modulus of the tracking error: `τ(h) = γ₁ + γ₂·h`.
pub fn tau(gamma1: f64, gamma2: f64, h: f64) -> f64 {
    gamma1 + gamma2 * h
}

/// Asymptotic (steady-state) tracking-error bounds and the modulus they
/// were evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticErrors {
    pub dual: f64,
    pub primal: f64,
    pub tau: f64,
}

/// Steady-state tracking-error bounds of the prediction-correction loop at
/// sampling period `h`.
///
/// With `B = ϱ_P^P(Δ₂Δ₃h + Δ₂C₀) + Δ₂Δ₃h`, the exact-derivative bounds are
///
/// ```text
///   dual   = ϱ_C^C · B · h / (1 − τ)
///   primal = σ_max · ϱ_C^{C−1} · B · h / ((1 − τ) m).
/// ```
///
/// In backward-difference mode `Δ̃₃ = Δ₃ + hC₃/2` replaces `Δ₃` inside `B`
/// and `(C₃/2)h²` is added to each numerator.
///
/// Fails with [`SolverError::NotContractive`] when `τ(h) ≥ 1`.
pub fn asymptotic_errors(
    mode: DerivativeMode,
    rho_p: f64,
    rho_c: f64,
    p_steps: usize,
    c_steps: usize,
    bounds: &SmoothnessBounds,
    cs: &ConstraintSet,
    h: f64,
) -> Result<AsymptoticErrors> {
    let cond = convergence_conditions(rho_p, rho_c, p_steps, c_steps, bounds, cs)?;
    let t = tau(cond.gamma1, cond.gamma2, h);
    if t >= 1.0 {
        return Err(SolverError::NotContractive { tau: t });
    }
    let d = deltas(bounds, cs);
    let d3 = match mode {
        DerivativeMode::Exact => d.delta3,
        DerivativeMode::BackwardDifference => delta3_tilde(d.delta3, bounds.c3, h),
    };
    let extra = match mode {
        DerivativeMode::Exact => 0.0,
        DerivativeMode::BackwardDifference => bounds.c3 / 2.0 * h * h,
    };
    let rp = powi(rho_p, p_steps);
    let bracket = rp * (d.delta2 * d3 * h + d.delta2 * bounds.c0) + d.delta2 * d3 * h;
    let dual = (powi(rho_c, c_steps) * bracket * h + extra) / (1.0 - t);
    let primal = (cs.sigma_max() * powi(rho_c, c_steps - 1) * bracket * h + extra)
        / ((1.0 - t) * bounds.m);
    Ok(AsymptoticErrors { dual, primal, tau: t })
}

/// Steady-state primal error bounds of the correction-only baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineErrors {
    /// Correction-plus-extra-correction: `C` delivered rounds followed by
    /// `C′` carried rounds per step.
    pub err_cec: f64,
    /// Total-correction: all `C″` rounds delivered.
    pub err_tc: f64,
}

/// Bound formulas for the correction-only strategies, in terms of the
/// per-round factor `ϱ_C` and the drift constant `K`:
///
/// ```text
///   err_cec = (σ_max/m)·ϱ_C^{C−1}·(ϱ_C^{C+C′}·K/(1 − ϱ_C^C) + K)
///   err_tc  = (σ_max/m)·ϱ_C^{C″−1}·(ϱ_C^{C″}·K/(1 − ϱ_C^{C″}) + K)
/// ```
///
/// A strategy with zero delivered rounds (`C = 0` or `C″ = 0`) has no
/// tracking guarantee; its bound is reported as infinite (unless `K = 0`,
/// where every bound is zero). The prediction-correction reference value
/// for side-by-side comparison is the primal bound of [`asymptotic_errors`].
pub fn baseline_error_bounds(
    rho_c: f64,
    c_steps: usize,
    c_extra: usize,
    c_total: usize,
    k_drift: f64,
    cs: &ConstraintSet,
    m: f64,
) -> BaselineErrors {
    let gain = cs.sigma_max() / m;
    if k_drift == 0.0 {
        return BaselineErrors { err_cec: 0.0, err_tc: 0.0 };
    }
    let err_cec = if c_steps == 0 {
        f64::INFINITY
    } else {
        gain * powi(rho_c, c_steps - 1)
            * (powi(rho_c, c_steps + c_extra) * k_drift / (1.0 - powi(rho_c, c_steps)) + k_drift)
    };
    let err_tc = if c_total == 0 {
        f64::INFINITY
    } else {
        gain * powi(rho_c, c_total - 1)
            * (powi(rho_c, c_total) * k_drift / (1.0 - powi(rho_c, c_total)) + k_drift)
    };
    BaselineErrors { err_cec, err_tc }
}

/// Worst-case movement of the optimizer pair of
/// `min ½xᵀQx + cᵀx  s.t. Ax = b` when the linear term moves by `‖δc‖ =
/// c_norm` (with `mI ⪯ Q ⪯ LI` and the multiplier taken in `im(A)`):
///
/// ```text
///   ‖δx*‖ ≤ (1/m)(1 + (L/m)(σ_max²/σ_min⁺²))·c_norm
///   ‖δλ*‖ ≤ (L/m)(σ_max/σ_min⁺²)·c_norm
/// ```
pub fn qp_perturbation_bounds(m: f64, l: f64, cs: &ConstraintSet, c_norm: f64) -> (f64, f64) {
    let hi = cs.sigma_max();
    let lo = cs.sigma_min_pos();
    let x_bound = (1.0 / m) * (1.0 + (l / m) * (hi * hi) / (lo * lo)) * c_norm;
    let lambda_bound = (l / m) * hi / (lo * lo) * c_norm;
    (x_bound, lambda_bound)
}

/// Every closed-form constant and bound for one tracker configuration,
/// suitable for printing or serialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
    pub delta3_tilde: f64,
    pub rho_p: f64,
    pub rho_c: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// `τ(h)` at the report's sampling period.
    pub tau_h: f64,
    /// Largest admissible sampling period (0 when `γ₁ ≥ 1`).
    pub h_max: f64,
    /// Drift constant `K` at the report's sampling period.
    pub k_drift: f64,
    /// Steady-state bounds; infinite when `τ(h) ≥ 1`.
    pub asym_dual: f64,
    pub asym_primal: f64,
    pub err_cec: f64,
    pub err_tc: f64,
    /// Prediction-correction reference: equals `asym_primal`.
    pub err_pc: f64,
}

/// Evaluate the full bound suite for one configuration. Non-contractive
/// configurations produce infinite asymptotic fields rather than an error;
/// `C = 0` or factors outside `[0, 1)` are still rejected.
#[allow(clippy::too_many_arguments)]
pub fn bound_report(
    mode: DerivativeMode,
    rho_p: f64,
    rho_c: f64,
    p_steps: usize,
    c_steps: usize,
    c_extra: usize,
    c_total: usize,
    bounds: &SmoothnessBounds,
    cs: &ConstraintSet,
    h: f64,
) -> Result<BoundReport> {
    let cond = convergence_conditions(rho_p, rho_c, p_steps, c_steps, bounds, cs)?;
    let d = deltas(bounds, cs);
    let k = drift_constant_k(bounds, cs, h);
    let t = tau(cond.gamma1, cond.gamma2, h);
    let (asym_dual, asym_primal) = match asymptotic_errors(
        mode, rho_p, rho_c, p_steps, c_steps, bounds, cs, h,
    ) {
        Ok(a) => (a.dual, a.primal),
        Err(SolverError::NotContractive { .. }) => (f64::INFINITY, f64::INFINITY),
        Err(e) => return Err(e),
    };
    let base = baseline_error_bounds(rho_c, c_steps, c_extra, c_total, k, cs, bounds.m);
    Ok(BoundReport {
        delta1: d.delta1,
        delta2: d.delta2,
        delta3: d.delta3,
        delta4: d.delta4,
        delta3_tilde: delta3_tilde(d.delta3, bounds.c3, h),
        rho_p,
        rho_c,
        gamma1: cond.gamma1,
        gamma2: cond.gamma2,
        tau_h: t,
        h_max: if cond.contractive { cond.h_max } else { 0.0 },
        k_drift: k,
        asym_dual,
        asym_primal,
        err_cec: base.err_cec,
        err_tc: base.err_tc,
        err_pc: asym_primal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{analyze_constraints, DEFAULT_RANK_TOL};
    use alloc::vec;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    /// Constraint set with singular values exactly {2, 1}: κ_A = 2.
    fn cs_spectrum_2_1() -> ConstraintSet {
        analyze_constraints(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            DVector::zeros(2),
            DEFAULT_RANK_TOL,
        )
        .unwrap()
    }

    /// Constraint set with a single unit singular value: κ_A = 1.
    fn cs_unit() -> ConstraintSet {
        analyze_constraints(
            DMatrix::from_row_slice(1, 1, &[1.0]),
            DVector::zeros(1),
            DEFAULT_RANK_TOL,
        )
        .unwrap()
    }

    #[test]
    fn deltas_frozen_example() {
        // κ_f = 1.25, κ_A = 2, m = 1, σ_min⁺ = 1 → Δ₁ = 6, Δ₂ = 2.5.
        let b = SmoothnessBounds::new(1.0, 1.25).unwrap();
        let d = deltas(&b, &cs_spectrum_2_1());
        assert_relative_eq!(d.delta1, 6.0, epsilon = 1e-12);
        assert_relative_eq!(d.delta2, 2.5, epsilon = 1e-12);
        // No drift constants → Δ₃ = Δ₄ = 0.
        assert_eq!(d.delta3, 0.0);
        assert_eq!(d.delta4, 0.0);
    }

    #[test]
    fn delta3_with_only_third_constant() {
        let b = SmoothnessBounds::new(1.0, 1.0)
            .unwrap()
            .with_drift(0.0, 0.0, 0.0, 0.4)
            .unwrap();
        let d = deltas(&b, &cs_unit());
        assert_relative_eq!(d.delta3, 0.2, epsilon = 1e-15);
        let h = 0.3;
        assert_relative_eq!(delta3_tilde(d.delta3, b.c3, h), 0.2 * (1.0 + h), epsilon = 1e-15);
    }

    #[test]
    fn drift_bounds_frozen_example() {
        // κ_f = 1, κ_A = 1, m = 1, C₀ = 1, h = 0.1 → primal 0.2, dual 0.1.
        let b = SmoothnessBounds::new(1.0, 1.0)
            .unwrap()
            .with_drift(1.0, 0.0, 0.0, 0.0)
            .unwrap();
        let cs = cs_unit();
        let (p, d) = drift_bounds(&b, &cs, 0.1);
        assert_relative_eq!(p, 0.2, epsilon = 1e-12);
        assert_relative_eq!(d, 0.1, epsilon = 1e-12);
        assert_relative_eq!(drift_constant_k(&b, &cs, 0.1), 0.2, epsilon = 1e-12);

        // Halving h halves both exactly.
        let (p2, d2) = drift_bounds(&b, &cs, 0.05);
        assert_eq!(p2, p / 2.0);
        assert_eq!(d2, d / 2.0);

        // C₀ = 0 kills the drift entirely.
        let b0 = SmoothnessBounds::new(1.0, 1.0).unwrap();
        assert_eq!(drift_bounds(&b0, &cs, 0.1), (0.0, 0.0));
        assert_eq!(drift_constant_k(&b0, &cs, 0.1), 0.0);
    }

    #[test]
    fn gamma1_frozen_example() {
        // ϱ_P = ϱ_C = 0.8, P = 1, C = 5 → γ₁ = 0.8⁵·(2·0.8 + 1) = 0.851968.
        let b = SmoothnessBounds::new(1.0, 1.0).unwrap();
        let cond = convergence_conditions(0.8, 0.8, 1, 5, &b, &cs_unit()).unwrap();
        assert_relative_eq!(cond.gamma1, 0.851968, epsilon = 1e-12);
        assert!(cond.contractive);
        // No drift constants → γ₂ = 0, h_max infinite.
        assert_eq!(cond.gamma2, 0.0);
        assert!(cond.h_max.is_infinite());
    }

    #[test]
    fn gamma1_limit_of_exact_prediction() {
        // ϱ_P = 0 (or P → ∞) collapses γ₁ to ϱ_C^C.
        let b = SmoothnessBounds::new(1.0, 1.0).unwrap();
        let cs = cs_unit();
        let cond = convergence_conditions(0.0, 0.8, 3, 4, &b, &cs).unwrap();
        assert_relative_eq!(cond.gamma1, num::powi(0.8, 4), epsilon = 1e-15);
    }

    #[test]
    fn gamma2_matches_delta4_form() {
        let b = SmoothnessBounds::new(1.0, 1.25)
            .unwrap()
            .with_drift(0.7, 0.3, 0.2, 0.1)
            .unwrap();
        let cs = cs_spectrum_2_1();
        let d = deltas(&b, &cs);
        let cond = convergence_conditions(0.8, 0.9, 2, 3, &b, &cs).unwrap();
        let kf = b.kappa_f();
        let ka = cs.kappa_a();
        let expected = (kf * ka * ka / b.m)
            * d.delta4
            * num::powi(0.9, 2)
            * (num::powi(0.8, 2) + 1.0);
        assert_relative_eq!(cond.gamma2, expected, epsilon = 1e-14);
        // τ at the critical period is exactly one.
        assert_relative_eq!(tau(cond.gamma1, cond.gamma2, cond.h_max), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tau_arithmetic() {
        assert_eq!(tau(0.7, 2.0, 0.0), 0.7);
        assert_relative_eq!(tau(0.85, 1.0, 0.05), 0.90, epsilon = 1e-12);
    }

    #[test]
    fn zero_correction_rounds_rejected() {
        let b = SmoothnessBounds::new(1.0, 1.0).unwrap();
        assert!(matches!(
            convergence_conditions(0.5, 0.5, 1, 0, &b, &cs_unit()),
            Err(SolverError::InvalidParameter { .. })
        ));
        assert!(matches!(
            convergence_conditions(1.0, 0.5, 1, 1, &b, &cs_unit()),
            Err(SolverError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn asymptotic_errors_vanish_without_drift() {
        let b = SmoothnessBounds::new(1.0, 1.0).unwrap();
        let a = asymptotic_errors(DerivativeMode::Exact, 0.5, 0.5, 2, 2, &b, &cs_unit(), 0.1)
            .unwrap();
        assert_eq!(a.dual, 0.0);
        assert_eq!(a.primal, 0.0);
    }

    #[test]
    fn asymptotic_errors_quadratic_in_h_without_prediction_residual() {
        // ϱ_P = 0 removes the O(h) term; the bound then scales as h².
        let b = SmoothnessBounds::new(1.0, 1.25)
            .unwrap()
            .with_drift(0.7, 0.3, 0.2, 0.1)
            .unwrap();
        let cs = cs_spectrum_2_1();
        let at = |h: f64| {
            asymptotic_errors(DerivativeMode::Exact, 0.0, 0.6, 1, 6, &b, &cs, h)
                .unwrap()
                .primal
        };
        let h = 1e-4;
        let ratio = at(h) / at(h / 2.0);
        assert!((3.9..=4.1).contains(&ratio), "expected ~4, got {ratio}");
    }

    #[test]
    fn backward_difference_enlarges_the_bound() {
        let b = SmoothnessBounds::new(1.0, 1.25)
            .unwrap()
            .with_drift(0.7, 0.3, 0.2, 0.1)
            .unwrap();
        let cs = cs_spectrum_2_1();
        let exact =
            asymptotic_errors(DerivativeMode::Exact, 0.6, 0.6, 2, 6, &b, &cs, 0.05).unwrap();
        let bd = asymptotic_errors(DerivativeMode::BackwardDifference, 0.6, 0.6, 2, 6, &b, &cs, 0.05)
            .unwrap();
        assert!(bd.dual > exact.dual);
        assert!(bd.primal > exact.primal);
    }

    #[test]
    fn asymptotic_errors_reject_non_contractive_period() {
        let b = SmoothnessBounds::new(1.0, 1.25)
            .unwrap()
            .with_drift(0.7, 0.3, 0.2, 0.1)
            .unwrap();
        let cs = cs_spectrum_2_1();
        let cond = convergence_conditions(0.6, 0.6, 2, 6, &b, &cs).unwrap();
        let err = asymptotic_errors(
            DerivativeMode::Exact,
            0.6,
            0.6,
            2,
            6,
            &b,
            &cs,
            cond.h_max * 1.01,
        );
        assert!(matches!(err, Err(SolverError::NotContractive { .. })));
    }

    #[test]
    fn baseline_bounds_frozen_examples() {
        let cs = cs_unit();
        // K = 0 → both zero.
        let z = baseline_error_bounds(0.8, 3, 3, 6, 0.0, &cs, 1.0);
        assert_eq!((z.err_cec, z.err_tc), (0.0, 0.0));

        // ϱ = 0.8, C = 3, C′ = 3, C″ = 2C = 6, K = 1, σ_max = m = 1.
        let b = baseline_error_bounds(0.8, 3, 3, 6, 1.0, &cs, 1.0);
        let rc3 = num::powi(0.8, 3);
        let rc6 = num::powi(0.8, 6);
        let cec = num::powi(0.8, 2) * (rc6 / (1.0 - rc3) + 1.0);
        let tc = num::powi(0.8, 5) * (rc6 / (1.0 - rc6) + 1.0);
        assert_relative_eq!(b.err_cec, cec, epsilon = 1e-14);
        assert_relative_eq!(b.err_tc, tc, epsilon = 1e-14);
        // Spending the whole budget on delivered corrections wins.
        assert!(b.err_tc < b.err_cec);
    }

    #[test]
    fn extra_corrections_only_shrink_the_cec_bound() {
        let cs = cs_unit();
        let mut prev = f64::INFINITY;
        for c_extra in 0..12 {
            let b = baseline_error_bounds(0.8, 3, c_extra, 6, 1.0, &cs, 1.0);
            assert!(b.err_cec <= prev);
            prev = b.err_cec;
        }
        // The C′-dependent term decays to zero: the bound approaches the
        // carried-free formula (σ_max/m)ϱ^{C−1}K.
        let limit = num::powi(0.8, 2);
        let b = baseline_error_bounds(0.8, 3, 200, 6, 1.0, &cs, 1.0);
        assert_relative_eq!(b.err_cec, limit, epsilon = 1e-12);
    }

    #[test]
    fn qp_perturbation_frozen_example() {
        // m = L = 1, σ_max = σ_min = 1, ‖δc‖ = 1 → (2, 1).
        let (xb, lb) = qp_perturbation_bounds(1.0, 1.0, &cs_unit(), 1.0);
        assert_relative_eq!(xb, 2.0, epsilon = 1e-12);
        assert_relative_eq!(lb, 1.0, epsilon = 1e-12);
        // Zero perturbation → zero bounds.
        assert_eq!(qp_perturbation_bounds(1.0, 1.0, &cs_unit(), 0.0), (0.0, 0.0));
        // The perturbation bounds are the Δ constants times the norm.
        let b = SmoothnessBounds::new(1.0, 1.25).unwrap();
        let cs = cs_spectrum_2_1();
        let d = deltas(&b, &cs);
        let (xb, lb) = qp_perturbation_bounds(b.m, b.l, &cs, 0.7);
        assert_relative_eq!(xb, d.delta1 * 0.7, epsilon = 1e-12);
        // Δ₂ = κ_f κ_A/σ_min = (L/m)(σ_max/σ_min²) only when σ_min⁺ is the
        // relevant scale; both forms agree algebraically.
        assert_relative_eq!(lb, d.delta2 / cs.sigma_min_pos() * 0.7, epsilon = 1e-12);
    }

    #[test]
    fn report_collects_consistent_fields() {
        let b = SmoothnessBounds::new(1.0, 1.25)
            .unwrap()
            .with_drift(0.7, 0.0, 0.2, 0.1)
            .unwrap();
        let cs = cs_spectrum_2_1();
        let h = 0.01;
        let r = bound_report(DerivativeMode::Exact, 0.6, 0.6, 5, 6, 2, 8, &b, &cs, h).unwrap();
        assert_relative_eq!(r.tau_h, r.gamma1 + r.gamma2 * h, epsilon = 1e-14);
        assert_eq!(r.err_pc, r.asym_primal);
        assert!(r.tau_h < 1.0);
        assert!(r.asym_primal.is_finite());
        assert_relative_eq!(r.k_drift, drift_constant_k(&b, &cs, h), epsilon = 1e-15);

        // Past h_max the asymptotic fields go infinite but the report stays Ok.
        let r2 = bound_report(
            DerivativeMode::Exact,
            0.6,
            0.6,
            5,
            6,
            2,
            8,
            &b,
            &cs,
            r.h_max * 1.5,
        )
        .unwrap();
        assert!(r2.asym_primal.is_infinite());
        assert!(r2.asym_dual.is_infinite());
    }
}
