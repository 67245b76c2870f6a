//! Trajectory records produced by the running solvers and trackers.

use alloc::vec::Vec;

use nalgebra::DVector;

/// One logged sample: the iterate delivered at sample `k` (time `t`), plus
/// distances to the ground-truth optimizer pair when an oracle was attached.
#[derive(Debug, Clone)]
pub struct TrajectoryStep {
    pub k: usize,
    pub t: f64,
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    /// `‖x_k − x*(t_k)‖`, if measured.
    pub primal_err: Option<f64>,
    /// `‖λ_k − λ*(t_k)‖`, if measured.
    pub dual_err: Option<f64>,
}

/// Ordered sample records of one solver run. Row 0 is the initial state.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryLog {
    pub steps: Vec<TrajectoryStep>,
}

impl TrajectoryLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: TrajectoryStep) {
        self.steps.push(step);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryStep> {
        self.steps.last()
    }

    /// Largest recorded (primal, dual) error over the trailing portion of the
    /// run: rows with `k ≥ burn_in · k_last` are considered, so `burn_in` is
    /// the fraction of the horizon discarded as transient. Returns `None`
    /// when no row in the window carries error measurements.
    pub fn tail_max_errors(&self, burn_in: f64) -> Option<(f64, f64)> {
        let k_last = self.steps.last()?.k;
        let cut = burn_in * k_last as f64;
        let mut start = if cut <= 0.0 { 0 } else { cut as usize };
        if (start as f64) < cut {
            start += 1;
        }
        let mut best: Option<(f64, f64)> = None;
        for s in self.steps.iter().filter(|s| s.k >= start) {
            if let (Some(p), Some(d)) = (s.primal_err, s.dual_err) {
                let (bp, bd) = best.unwrap_or((0.0, 0.0));
                best = Some((bp.max(p), bd.max(d)));
            }
        }
        best
    }
}
