//! Problem data: time-varying objective oracles, curvature/drift envelopes,
//! and the spectral geometry of the equality constraint.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::SolverError;
use crate::Result;

/// Default relative cutoff below which singular values are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative tolerance for deciding that the right-hand side lies in the image
/// of the constraint matrix: `‖A·A⁺b − b‖ ≤ FEASIBILITY_RTOL · max(1, ‖b‖)`.
pub const FEASIBILITY_RTOL: f64 = 1e-10;

/// Vector-valued oracle: maps a point and a time to a vector (gradients,
/// mixed time derivatives of gradients, ...). Oracles must be pure functions
/// of their arguments; they may be evaluated from multiple threads.
pub type VectorOracle = Box<dyn Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync>;

/// Matrix-valued oracle: maps a point and a time to a symmetric matrix.
pub type MatrixOracle = Box<dyn Fn(&DVector<f64>, f64) -> DMatrix<f64> + Send + Sync>;

/// Curvature and drift envelope of a time-varying objective, uniform in time.
///
/// `m` and `l` bound the Hessian spectrum (`m I ⪯ ∇²f ⪯ l I`); the `c*`
/// constants bound how fast the gradient field can change:
///
/// * `c0` — norm of the mixed derivative `∂t ∇f`,
/// * `c1` — norm of the third spatial derivative tensor,
/// * `c2` — norm of the spatial derivative of `∂t ∇f`,
/// * `c3` — norm of the second time derivative `∂tt ∇f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessBounds {
    /// Strong convexity modulus `m > 0`.
    pub m: f64,
    /// Gradient Lipschitz constant `L ≥ m`.
    pub l: f64,
    /// Bound on `‖∂t ∇f‖`.
    pub c0: f64,
    /// Bound on `‖∇³f‖`.
    pub c1: f64,
    /// Bound on `‖∂x ∂t ∇f‖`.
    pub c2: f64,
    /// Bound on `‖∂tt ∇f‖`.
    pub c3: f64,
}

impl SmoothnessBounds {
    /// Curvature-only envelope; all drift constants start at zero.
    pub fn new(m: f64, l: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(SolverError::InvalidParameter {
                what: "strong convexity modulus must be positive and finite",
            });
        }
        if !(l >= m) || !l.is_finite() {
            return Err(SolverError::InvalidParameter {
                what: "smoothness constant must satisfy l >= m",
            });
        }
        Ok(Self { m, l, c0: 0.0, c1: 0.0, c2: 0.0, c3: 0.0 })
    }

    /// Attach drift constants (each must be finite and nonnegative).
    pub fn with_drift(mut self, c0: f64, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        for c in [c0, c1, c2, c3] {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(SolverError::InvalidParameter {
                    what: "drift constants must be finite and nonnegative",
                });
            }
        }
        self.c0 = c0;
        self.c1 = c1;
        self.c2 = c2;
        self.c3 = c3;
        Ok(self)
    }

    /// Objective condition number `κ_f = L / m`.
    pub fn kappa_f(&self) -> f64 {
        self.l / self.m
    }
}

/// Equality constraint `A x = b` together with the spectral data of `A`.
///
/// The factorization is computed once and reused by every solver:
/// projections onto `im(A)`, the full-row-rank reduction used by KKT solves,
/// and minimum-norm least squares all come from the same SVD. Singular values
/// below `rank_tol · σ_max` are treated as zero, so rank-deficient operators
/// (duplicated or dependent rows) are supported; `σ_min⁺` always denotes the
/// smallest *retained* singular value.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    a: DMatrix<f64>,
    b: DVector<f64>,
    /// Retained left singular vectors, `p × r`.
    u_r: DMatrix<f64>,
    /// Retained singular values, descending.
    sigma: DVector<f64>,
    /// Reduced operator `Σ V_rᵀ` (`r × n`, full row rank); `A = U_r · a_reduced`.
    a_reduced: DMatrix<f64>,
    /// Reduced right-hand side `U_rᵀ b`.
    b_reduced: DVector<f64>,
}

impl ConstraintSet {
    /// Factor `A`, classify its spectrum, and verify that `b ∈ im(A)`.
    pub fn analyze(a: DMatrix<f64>, b: DVector<f64>, rank_tol: f64) -> Result<Self> {
        let (p, n) = a.shape();
        if p == 0 || n == 0 {
            return Err(SolverError::ZeroMatrix);
        }
        if b.len() != p {
            return Err(SolverError::DimensionMismatch { expected: p, got: b.len() });
        }
        if a.iter().all(|&v| v == 0.0) {
            return Err(SolverError::ZeroMatrix);
        }
        if !(rank_tol >= 0.0) {
            return Err(SolverError::InvalidParameter { what: "rank tolerance must be >= 0" });
        }

        let svd = a.clone().svd(true, true);
        let u = svd.u.expect("left singular vectors requested");
        let v_t = svd.v_t.expect("right singular vectors requested");
        let sv = svd.singular_values;

        let sigma_max = sv.iter().cloned().fold(0.0_f64, f64::max);
        let cutoff = rank_tol * sigma_max;
        let mut retained: Vec<usize> =
            (0..sv.len()).filter(|&i| sv[i] > 0.0 && sv[i] >= cutoff).collect();
        retained.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).expect("finite singular values"));
        if retained.is_empty() {
            return Err(SolverError::ZeroMatrix);
        }

        let r = retained.len();
        let u_r = DMatrix::from_fn(p, r, |row, col| u[(row, retained[col])]);
        let v_r = DMatrix::from_fn(n, r, |row, col| v_t[(retained[col], row)]);
        let sigma = DVector::from_fn(r, |i, _| sv[retained[i]]);

        // Feasibility check via minimum-norm least squares: x_ls = A⁺ b.
        let b_reduced = u_r.tr_mul(&b);
        let scaled = DVector::from_fn(r, |i, _| b_reduced[i] / sigma[i]);
        let x_ls = &v_r * scaled;
        let residual = (&a * x_ls - &b).norm();
        if residual > FEASIBILITY_RTOL * 1.0_f64.max(b.norm()) {
            return Err(SolverError::InfeasibleRhs { residual });
        }

        let a_reduced = DMatrix::from_fn(r, n, |i, j| sigma[i] * v_r[(j, i)]);
        Ok(Self { a, b, u_r, sigma, a_reduced, b_reduced })
    }

    /// The constraint matrix `A`.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// The right-hand side `b`.
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Number of primal variables `n`.
    pub fn primal_dim(&self) -> usize {
        self.a.ncols()
    }

    /// Number of constraint rows `p` (the ambient dual dimension).
    pub fn dual_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Numerical rank `r`.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Largest singular value `σ_max`.
    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    /// Smallest retained (positive) singular value `σ_min⁺`.
    pub fn sigma_min_pos(&self) -> f64 {
        self.sigma[self.sigma.len() - 1]
    }

    /// Constraint condition number `κ_A = σ_max / σ_min⁺`.
    pub fn kappa_a(&self) -> f64 {
        self.sigma_max() / self.sigma_min_pos()
    }

    /// Orthogonal projection of `v` onto `im(A)`.
    pub fn project_onto_image(&self, v: &DVector<f64>) -> DVector<f64> {
        assert_eq!(v.len(), self.dual_dim(), "projection input must have p entries");
        &self.u_r * self.u_r.tr_mul(v)
    }

    /// Full-row-rank reduction `Σ V_rᵀ` of `A` (shares the row space of `A`).
    pub fn a_reduced(&self) -> &DMatrix<f64> {
        &self.a_reduced
    }

    /// Right-hand side expressed in the reduced row space, `U_rᵀ b`.
    pub fn b_reduced(&self) -> &DVector<f64> {
        &self.b_reduced
    }

    /// Lift a reduced multiplier `μ ∈ ℝʳ` to the ambient image representative
    /// `λ = U_r μ ∈ im(A)`; satisfies `Aᵀλ = a_reducedᵀ μ`.
    pub fn lift_multiplier(&self, mu: &DVector<f64>) -> DVector<f64> {
        &self.u_r * mu
    }

    /// Project an ambient multiplier onto reduced coordinates, `μ = U_rᵀ λ`.
    pub fn reduce_multiplier(&self, lambda: &DVector<f64>) -> DVector<f64> {
        self.u_r.tr_mul(lambda)
    }

    /// Constraint residual vector `A x − b`.
    pub fn residual_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    /// Constraint residual norm `‖A x − b‖`.
    pub fn residual_norm(&self, x: &DVector<f64>) -> f64 {
        self.residual_vec(x).norm()
    }
}

/// Factor the constraint operator and verify feasibility of `b`.
///
/// Singular values below `rank_tol · σ_max` are treated as zero
/// ([`DEFAULT_RANK_TOL`] is the conventional choice).
pub fn analyze_constraints(a: DMatrix<f64>, b: DVector<f64>, rank_tol: f64) -> Result<ConstraintSet> {
    ConstraintSet::analyze(a, b, rank_tol)
}

/// Orthogonal projection of `v` onto the image of the constraint matrix.
pub fn project_onto_image(v: &DVector<f64>, cs: &ConstraintSet) -> DVector<f64> {
    cs.project_onto_image(v)
}

/// A time-varying objective with its constraint set and envelope constants.
///
/// Oracles receive `(x, t)` and must be thread-safe pure functions. The mixed
/// derivative oracle `∂t ∇f` is optional; trackers configured for backward
/// differences never call it.
pub struct TimeVaryingProblem {
    grad: VectorOracle,
    hessian: MatrixOracle,
    mixed_grad: Option<VectorOracle>,
    bounds: SmoothnessBounds,
    constraints: ConstraintSet,
}

impl TimeVaryingProblem {
    pub fn new(
        grad: VectorOracle,
        hessian: MatrixOracle,
        bounds: SmoothnessBounds,
        constraints: ConstraintSet,
    ) -> Self {
        Self { grad, hessian, mixed_grad: None, bounds, constraints }
    }

    /// Attach an exact mixed-derivative oracle `(x, t) ↦ ∂t ∇f(x; t)`.
    pub fn with_mixed_grad(mut self, oracle: VectorOracle) -> Self {
        self.mixed_grad = Some(oracle);
        self
    }

    /// Primal dimension `n`.
    pub fn dim(&self) -> usize {
        self.constraints.primal_dim()
    }

    /// Objective gradient `∇f(x; t)`.
    pub fn grad(&self, x: &DVector<f64>, t: f64) -> DVector<f64> {
        (self.grad)(x, t)
    }

    /// Objective Hessian `∇²f(x; t)`.
    pub fn hessian(&self, x: &DVector<f64>, t: f64) -> DMatrix<f64> {
        (self.hessian)(x, t)
    }

    /// Exact mixed derivative `∂t ∇f(x; t)`, if an oracle was attached.
    pub fn mixed_grad(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        match &self.mixed_grad {
            Some(o) => Ok(o(x, t)),
            None => Err(SolverError::MissingMixedGradient),
        }
    }

    pub fn has_mixed_grad(&self) -> bool {
        self.mixed_grad.is_some()
    }

    pub fn bounds(&self) -> &SmoothnessBounds {
        &self.bounds
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }
}

impl core::fmt::Debug for TimeVaryingProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("TimeVaryingProblem")
            .field("dim", &self.dim())
            .field("constraint_rows", &self.constraints.dual_dim())
            .field("has_mixed_grad", &self.has_mixed_grad())
            .field("bounds", &self.bounds)
            .finish()
    }
}

/// A primal-dual iterate tagged with its sample index and time.
///
/// The dual iterate lives in the ambient space `ℝᵖ`; solvers keep it inside
/// `im(A)` (dual updates add multiples of residuals `A x − b ∈ im(A)` when
/// `b ∈ im(A)`, and initial states should satisfy the same).
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualState {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    /// Sample index of the iterate.
    pub k: usize,
    /// Sample time of the iterate.
    pub t: f64,
}

impl PrimalDualState {
    pub fn new(x: DVector<f64>, lambda: DVector<f64>, k: usize, t: f64) -> Self {
        Self { x, lambda, k, t }
    }

    /// All-zero state (a valid dual start: `0 ∈ im(A)`).
    pub fn zeros(primal_dim: usize, dual_dim: usize, t: f64) -> Self {
        Self { x: DVector::zeros(primal_dim), lambda: DVector::zeros(dual_dim), k: 0, t }
    }
}
