//! Tracking solvers for time-varying, linearly equality-constrained, strongly
//! convex programs.
//!
//! The problem family is `min_x f(x; t)  s.t.  A x = b`, sampled at instants
//! `t_k = t_0 + k h`. The crate provides:
//!
//! * [`problem`] — objective oracles, curvature/drift envelopes, and the
//!   spectral analysis of the constraint operator (rank-deficient `A` is
//!   handled throughout; dual variables live in the image of `A`).
//! * [`solvers`] — the inner primal minimizer, dual ascent, a running
//!   one-update-per-sample variant, and a high-accuracy KKT reference solver.
//! * [`prediction`] — one-step prediction of the optimizer pair from the
//!   objective's time derivative, either by an exact KKT solve or by cheap
//!   dual-gradient rounds, with an optional backward-difference derivative.
//! * [`tracker`] — the prediction-correction sampling loop and the
//!   correction-only baselines, plus the runtime budget calculator.
//! * [`bounds`] — closed-form tracking guarantees: contraction factors,
//!   drift constants, convergence conditions, and asymptotic error envelopes.
//! * [`distributed`] — node-level execution of the same tracker over a
//!   communication graph with exact message accounting.
//!
//! The crate is `no_std`-compatible (allocation required): disable the
//! default `std` feature and enable `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod distributed;
mod error;
mod num;
pub mod prediction;
pub mod problem;
pub mod solvers;
pub mod tracker;
pub mod trajectory;

pub use error::SolverError;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, SolverError>;

pub use problem::{
    analyze_constraints, project_onto_image, ConstraintSet, PrimalDualState, SmoothnessBounds,
    TimeVaryingProblem,
};
pub use solvers::{
    contraction_factor, dual_ascent, inner_primal_min, optimal_stepsize, running_dual_ascent,
    solve_oracle, DualAscentConfig, OracleSolution,
};
pub use tracker::{
    compute_budget, run_adupc, run_baseline, BudgetAllocation, RuntimeBudget, Strategy,
    TrackerConfig, TrackerRun,
};
