//! Node-level execution of the prediction-correction tracker over a
//! communication graph.
//!
//! A separable objective `Σᵢ fᵢ(yᵢ; t)` with consensus constraints
//! `yᵢ = yⱼ` for every graph edge lifts to a single equality-constrained
//! problem whose constraint matrix is the (block) edge-node incidence
//! matrix. Because the objective is separable and the incidence structure is
//! local, every inner round of the tracker decomposes into node-local
//! computations plus one exchange of local iterates with neighbors. The
//! simulator here executes exactly that schedule in deterministic lockstep
//! and records the per-node communication volume, which is
//! `(P + C)·N_i·n` scalars per node per time step.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::SolverError;
use crate::prediction::{DerivativeMode, PredictionMode};
use crate::problem::{
    analyze_constraints, ConstraintSet, MatrixOracle, PrimalDualState, SmoothnessBounds,
    TimeVaryingProblem, VectorOracle, DEFAULT_RANK_TOL,
};
use crate::solvers::{newton_min, trajectory_errors, OracleSolution};
use crate::tracker::{RunMeta, Strategy, TrackerConfig, TrackerRun};
use crate::trajectory::{TrajectoryLog, TrajectoryStep};
use crate::Result;

/// Undirected communication graph with normalized edge list: every edge is
/// stored once as `(i, j)` with `i < j`, sorted lexicographically. Edge
/// indices into [`CommGraph::edges`] are the block-row indices of the
/// incidence matrix.
#[derive(Debug, Clone)]
pub struct CommGraph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl CommGraph {
    /// Normalize, validate, and index an edge list. Self-loops,
    /// out-of-range endpoints, fewer than two nodes, and disconnected
    /// topologies are rejected; duplicate edges (in either orientation)
    /// collapse to one.
    pub fn new(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_nodes < 2 {
            return Err(SolverError::InvalidParameter {
                what: "a communication graph needs at least two nodes",
            });
        }
        let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(SolverError::InvalidParameter {
                    what: "self-loops are not allowed",
                });
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(SolverError::InvalidParameter {
                    what: "edge endpoint out of range",
                });
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();

        let mut adj = vec![Vec::new(); n_nodes];
        for &(i, j) in &normalized {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }

        let g = Self { n_nodes, edges: normalized, adj };
        if !g.is_connected() {
            return Err(SolverError::DisconnectedGraph);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_nodes];
        let mut queue = vec![0usize];
        seen[0] = true;
        let mut visited = 1;
        while let Some(i) = queue.pop() {
            for &j in &self.adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    visited += 1;
                    queue.push(j);
                }
            }
        }
        visited == self.n_nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Normalized edge list; the position of an edge is its block-row index
    /// in the incidence matrix.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Number of neighbors `N_i`.
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    /// Block edge-node incidence matrix in `ℝ^{|E|n × Nn}` encoding
    /// `yᵢ − yⱼ = 0` per edge, with `+I` on the lower-index endpoint.
    pub fn incidence(&self, local_dim: usize) -> DMatrix<f64> {
        let n = local_dim;
        let mut a = DMatrix::zeros(self.edges.len() * n, self.n_nodes * n);
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            for d in 0..n {
                a[(e * n + d, i * n + d)] = 1.0;
                a[(e * n + d, j * n + d)] = -1.0;
            }
        }
        a
    }
}

/// One node's private objective: oracles over its local variable only, plus
/// its local smoothness/drift constants.
pub struct NodeObjective {
    pub grad: VectorOracle,
    pub hessian: MatrixOracle,
    pub mixed_grad: Option<VectorOracle>,
    pub bounds: SmoothnessBounds,
}

impl NodeObjective {
    pub fn new(grad: VectorOracle, hessian: MatrixOracle, bounds: SmoothnessBounds) -> Self {
        Self { grad, hessian, mixed_grad: None, bounds }
    }

    pub fn with_mixed_grad(mut self, oracle: VectorOracle) -> Self {
        self.mixed_grad = Some(oracle);
        self
    }
}

/// Separable consensus problem over a graph: per-node objectives, the
/// analyzed incidence constraints, and smoothness constants valid for the
/// stacked objective.
pub struct LiftedProblem {
    nodes: Arc<Vec<NodeObjective>>,
    graph: CommGraph,
    local_dim: usize,
    constraints: ConstraintSet,
    bounds: SmoothnessBounds,
}

/// Assemble a [`LiftedProblem`] from per-node objectives.
///
/// The stacked constants follow from the block structure: curvature bounds
/// take the worst case over nodes (`m = min mᵢ`, `L = max Lᵢ`); the
/// gradient-level drift norms `C₀`, `C₃` combine as the Euclidean norm of
/// the per-node values (they bound stacked vectors), while the operator
/// bounds `C₁`, `C₂` take the maximum (they bound block-diagonal maps).
pub fn build_lifted(
    graph: CommGraph,
    nodes: Vec<NodeObjective>,
    local_dim: usize,
) -> Result<LiftedProblem> {
    if nodes.len() != graph.n_nodes() {
        return Err(SolverError::DimensionMismatch {
            expected: graph.n_nodes(),
            got: nodes.len(),
        });
    }
    if local_dim == 0 {
        return Err(SolverError::InvalidParameter { what: "local dimension must be >= 1" });
    }
    let mut m = f64::INFINITY;
    let mut l: f64 = 0.0;
    let mut c0_sq = 0.0;
    let mut c3_sq = 0.0;
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    for node in &nodes {
        m = m.min(node.bounds.m);
        l = l.max(node.bounds.l);
        c0_sq += node.bounds.c0 * node.bounds.c0;
        c3_sq += node.bounds.c3 * node.bounds.c3;
        c1 = c1.max(node.bounds.c1);
        c2 = c2.max(node.bounds.c2);
    }
    let bounds = SmoothnessBounds::new(m, l)?.with_drift(
        crate::num::sqrt(c0_sq),
        c1,
        c2,
        crate::num::sqrt(c3_sq),
    )?;
    let incidence = graph.incidence(local_dim);
    let b = DVector::zeros(incidence.nrows());
    let constraints = analyze_constraints(incidence, b, DEFAULT_RANK_TOL)?;
    Ok(LiftedProblem { nodes: Arc::new(nodes), graph, local_dim, constraints, bounds })
}

impl LiftedProblem {
    pub fn graph(&self) -> &CommGraph {
        &self.graph
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    /// Stacked primal dimension `N·n`.
    pub fn primal_dim(&self) -> usize {
        self.n_nodes() * self.local_dim
    }

    /// Stacked dual dimension `|E|·n`.
    pub fn dual_dim(&self) -> usize {
        self.graph.edges().len() * self.local_dim
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn bounds(&self) -> &SmoothnessBounds {
        &self.bounds
    }

    pub fn node(&self, i: usize) -> &NodeObjective {
        &self.nodes[i]
    }

    /// The same problem as a single stacked [`TimeVaryingProblem`], for
    /// centralized solvers and ground-truth oracles. The mixed-derivative
    /// oracle is attached only if every node has one.
    pub fn centralized_problem(&self) -> TimeVaryingProblem {
        let n = self.local_dim;
        let count = self.n_nodes();
        let nodes = self.nodes.clone();
        let grad: VectorOracle = alloc::boxed::Box::new(move |x, t| {
            let mut g = DVector::zeros(count * n);
            for i in 0..count {
                let gi = (nodes[i].grad)(&x.rows(i * n, n).into_owned(), t);
                g.rows_mut(i * n, n).copy_from(&gi);
            }
            g
        });
        let nodes = self.nodes.clone();
        let hessian: MatrixOracle = alloc::boxed::Box::new(move |x, t| {
            let mut h = DMatrix::zeros(count * n, count * n);
            for i in 0..count {
                let hi = (nodes[i].hessian)(&x.rows(i * n, n).into_owned(), t);
                h.view_mut((i * n, i * n), (n, n)).copy_from(&hi);
            }
            h
        });
        let mut problem = TimeVaryingProblem::new(
            grad,
            hessian,
            self.bounds.clone(),
            self.constraints.clone(),
        );
        if self.nodes.iter().all(|node| node.mixed_grad.is_some()) {
            let nodes = self.nodes.clone();
            let mixed: VectorOracle = alloc::boxed::Box::new(move |x, t| {
                let mut g = DVector::zeros(count * n);
                for i in 0..count {
                    let oracle = nodes[i].mixed_grad.as_ref().unwrap();
                    let gi = oracle(&x.rows(i * n, n).into_owned(), t);
                    g.rows_mut(i * n, n).copy_from(&gi);
                }
                g
            });
            problem = problem.with_mixed_grad(mixed);
        }
        problem
    }
}

/// Scalars transmitted by one node while advancing one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommBudgetRow {
    /// Index of the sample the step produced (matches the trajectory row).
    pub k: usize,
    pub node: usize,
    pub scalars_sent: usize,
}

/// Per-step, per-node communication ledger of a distributed run.
#[derive(Debug, Clone, Default)]
pub struct CommBudgetLog {
    pub rows: Vec<CommBudgetRow>,
}

impl CommBudgetLog {
    pub fn scalars_sent(&self, k: usize, node: usize) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.k == k && r.node == node)
            .map(|r| r.scalars_sent)
    }
}

/// State owned by one node: its local iterate and a mirror of the dual of
/// every incident edge. Both endpoints of an edge refresh their mirrors
/// with identical arithmetic from the same exchanged iterates, so mirrors
/// never diverge and the dual update costs no extra traffic.
struct NodeState {
    y: DVector<f64>,
    /// `(edge index, sign of this node in the edge, mirrored dual)`.
    edge_duals: Vec<(usize, f64, DVector<f64>)>,
}

impl NodeState {
    /// This node's slice of `Aᵀλ`: the sign-weighted sum of its incident
    /// edge duals, accumulated in increasing edge order.
    fn dual_pull(&self, n: usize) -> DVector<f64> {
        let mut s = DVector::zeros(n);
        for (_, sign, lam) in &self.edge_duals {
            s += lam * *sign;
        }
        s
    }
}

/// Execute the prediction-correction tracker as node-local computations with
/// synchronized neighbor exchange, returning the stacked trajectory and the
/// communication ledger.
///
/// Requires the `adupc` strategy with dual-gradient prediction (the exact
/// KKT prediction couples all nodes and has no local implementation). The
/// stacked log row `k` holds node iterates in node order and edge duals in
/// edge order, so the output schema matches the centralized tracker; with
/// `oracle_tol` set, rows carry distances to the stacked ground-truth pair.
pub fn simulate_distributed_adupc(
    lifted: &LiftedProblem,
    cfg: &TrackerConfig,
    init: &PrimalDualState,
    oracle_tol: Option<f64>,
) -> Result<(TrackerRun, CommBudgetLog)> {
    cfg.validate()?;
    if cfg.strategy != Strategy::Adupc {
        return Err(SolverError::InvalidParameter {
            what: "distributed execution implements the adupc strategy only",
        });
    }
    if cfg.prediction_mode != PredictionMode::DualGradient {
        return Err(SolverError::InvalidParameter {
            what: "distributed prediction requires the dual-gradient mode",
        });
    }
    let n = lifted.local_dim();
    let count = lifted.n_nodes();
    let graph = lifted.graph();
    if init.x.len() != lifted.primal_dim() {
        return Err(SolverError::DimensionMismatch {
            expected: lifted.primal_dim(),
            got: init.x.len(),
        });
    }
    if init.lambda.len() != lifted.dual_dim() {
        return Err(SolverError::DimensionMismatch {
            expected: lifted.dual_dim(),
            got: init.lambda.len(),
        });
    }

    // Split the stacked initial state into per-node states; both endpoints
    // of an edge start from the same mirror.
    let mut states: Vec<NodeState> = (0..count)
        .map(|i| NodeState {
            y: init.x.rows(i * n, n).into_owned(),
            edge_duals: graph
                .edges()
                .iter()
                .enumerate()
                .filter_map(|(e, &(a, b))| {
                    let sign = if a == i {
                        1.0
                    } else if b == i {
                        -1.0
                    } else {
                        return None;
                    };
                    Some((e, sign, init.lambda.rows(e * n, n).into_owned()))
                })
                .collect(),
        })
        .collect();

    // Diagnostics against the stacked ground truth reuse the centralized
    // oracle machinery; this is measurement, not part of the node schedule.
    let central = oracle_tol.map(|_| lifted.centralized_problem());
    let mut oracle_warm: Option<OracleSolution> = None;
    let mut log = TrajectoryLog::new();
    let mut comm = CommBudgetLog::default();

    let stack =
        |states: &[NodeState]| -> (DVector<f64>, DVector<f64>) {
            let mut x = DVector::zeros(count * n);
            for (i, s) in states.iter().enumerate() {
                x.rows_mut(i * n, n).copy_from(&s.y);
            }
            let mut lambda = DVector::zeros(graph.edges().len() * n);
            // Read each edge dual from its owner (the lower endpoint).
            for (e, &(a, _)) in graph.edges().iter().enumerate() {
                let owner = &states[a];
                let (_, _, lam) =
                    owner.edge_duals.iter().find(|(idx, _, _)| *idx == e).unwrap();
                lambda.rows_mut(e * n, n).copy_from(lam);
            }
            (x, lambda)
        };

    let record = |k: usize,
                  t: f64,
                  states: &[NodeState],
                  log: &mut TrajectoryLog,
                  warm: &mut Option<OracleSolution>|
     -> Result<()> {
        let (x, lambda) = stack(states);
        let (pe, de) = match (&central, oracle_tol) {
            (Some(problem), Some(tol)) => {
                let (p, d) = trajectory_errors(problem, t, &x, &lambda, tol, warm)?;
                (Some(p), Some(d))
            }
            _ => (None, None),
        };
        log.push(TrajectoryStep { k, t, x, lambda, primal_err: pe, dual_err: de });
        Ok(())
    };

    let t0 = init.t;
    record(0, t0, &states, &mut log, &mut oracle_warm)?;

    let mut prev_t: Option<f64> = None;
    for k in 0..cfg.k_max {
        let t = t0 + k as f64 * cfg.h;
        let t_next = t0 + (k + 1) as f64 * cfg.h;
        let mut sent = vec![0usize; count];

        // ---- Prediction phase: P dual-gradient rounds on the local QPs.
        let run_prediction = cfg.prediction_steps > 0
            && (cfg.derivative_mode == DerivativeMode::Exact || prev_t.is_some());
        if run_prediction {
            // Each node linearizes its own objective once per step.
            let mut factors: Vec<Cholesky<f64, Dyn>> = Vec::with_capacity(count);
            let mut hc: Vec<DVector<f64>> = Vec::with_capacity(count);
            for (i, s) in states.iter().enumerate() {
                let node = lifted.node(i);
                let q = (node.hessian)(&s.y, t);
                factors.push(q.cholesky().ok_or(SolverError::SingularHessian)?);
                let mixed = match cfg.derivative_mode {
                    DerivativeMode::Exact => match &node.mixed_grad {
                        Some(oracle) => oracle(&s.y, t),
                        None => return Err(SolverError::MissingMixedGradient),
                    },
                    DerivativeMode::BackwardDifference => {
                        let tp = prev_t.expect("guarded by run_prediction");
                        ((node.grad)(&s.y, t) - (node.grad)(&s.y, tp)) / (t - tp)
                    }
                };
                hc.push(mixed * cfg.h);
            }

            let mut dy: Vec<DVector<f64>> = vec![DVector::zeros(n); count];
            let mut dlam: Vec<Vec<(usize, f64, DVector<f64>)>> = states
                .iter()
                .map(|s| {
                    s.edge_duals
                        .iter()
                        .map(|&(e, sign, _)| (e, sign, DVector::zeros(n)))
                        .collect()
                })
                .collect();

            for _ in 0..cfg.prediction_steps {
                // (a) Local solves against each node's own factorization.
                for i in 0..count {
                    let mut rhs = -&hc[i];
                    for (_, sign, dl) in &dlam[i] {
                        rhs -= dl * *sign;
                    }
                    dy[i] = factors[i].solve(&rhs);
                }
                // (b) Exchange: every node sends its displacement to each
                // neighbor (n scalars per neighbor).
                let msgs: Vec<DVector<f64>> = dy.clone();
                for i in 0..count {
                    sent[i] += graph.degree(i) * n;
                }
                // (c) Both endpoints recompute each edge's dual displacement
                // from the same two iterates: mirrors stay identical.
                for i in 0..count {
                    for (e, _, dl) in &mut dlam[i] {
                        let (a, b) = graph.edges()[*e];
                        let other = if a == i { b } else { a };
                        let (lower, higher) =
                            if a == i { (&dy[i], &msgs[other]) } else { (&msgs[other], &dy[i]) };
                        *dl += (lower - higher) * cfg.beta;
                    }
                }
            }

            // Apply the predicted displacements.
            for i in 0..count {
                states[i].y += &dy[i];
                for ((_, _, lam), (_, _, dl)) in
                    states[i].edge_duals.iter_mut().zip(dlam[i].iter())
                {
                    *lam += dl;
                }
            }
        }
        prev_t = Some(t);

        // ---- Correction phase: C dual ascent rounds on the new objective.
        for _ in 0..cfg.correction_steps {
            // (a) Node-local primal minimization of fᵢ(·; t₊) + pullᵀ·y.
            for (i, s) in states.iter_mut().enumerate() {
                let node = lifted.node(i);
                let pull = s.dual_pull(n);
                s.y = newton_min(
                    |y| (node.grad)(y, t_next) + &pull,
                    |y| (node.hessian)(y, t_next),
                    &s.y,
                    cfg.inner_tol,
                    cfg.inner_max_iters,
                )?;
            }
            // (b) Exchange updated iterates.
            let msgs: Vec<DVector<f64>> = states.iter().map(|s| s.y.clone()).collect();
            for i in 0..count {
                sent[i] += graph.degree(i) * n;
            }
            // (c) Mirrored dual ascent on every edge.
            for (i, s) in states.iter_mut().enumerate() {
                let NodeState { y, edge_duals } = s;
                for (e, _, lam) in edge_duals.iter_mut() {
                    let (a, b) = graph.edges()[*e];
                    let other = if a == i { b } else { a };
                    let (lower, higher) =
                        if a == i { (&*y, &msgs[other]) } else { (&msgs[other], &*y) };
                    *lam += (lower - higher) * cfg.alpha;
                }
            }
        }

        for (i, &scalars) in sent.iter().enumerate() {
            comm.rows.push(CommBudgetRow { k: k + 1, node: i, scalars_sent: scalars });
        }
        record(k + 1, t_next, &states, &mut log, &mut oracle_warm)?;
    }

    let meta = RunMeta {
        strategy: Strategy::Adupc,
        prediction_steps: cfg.prediction_steps,
        correction_steps: cfg.correction_steps,
        extra_correction_steps: 0,
    };
    Ok((TrackerRun { log, meta }, comm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::run_adupc;
    use alloc::boxed::Box;
    use approx::assert_relative_eq;
    use core::sync::atomic::{AtomicUsize, Ordering};

    fn path_graph(n_nodes: usize) -> CommGraph {
        let edges: Vec<(usize, usize)> = (0..n_nodes - 1).map(|i| (i, i + 1)).collect();
        CommGraph::new(n_nodes, &edges).unwrap()
    }

    /// Node objective ½‖y − a·cos(ωt + φ)‖² over ℝⁿ (drifting quadratic).
    fn cosine_node(n: usize, amp: f64, omega: f64, phase: f64) -> NodeObjective {
        let target = move |t: f64| DVector::from_element(n, amp * (omega * t + phase).cos());
        let rate = move |t: f64| {
            DVector::from_element(n, amp * omega * (omega * t + phase).sin())
        };
        let c0 = (n as f64).sqrt() * amp * omega;
        let c3 = (n as f64).sqrt() * amp * omega * omega;
        let bounds = SmoothnessBounds::new(1.0, 1.0)
            .unwrap()
            .with_drift(c0, 0.0, 0.0, c3)
            .unwrap();
        NodeObjective::new(
            Box::new(move |y: &DVector<f64>, t| y - target(t)),
            Box::new(move |_: &DVector<f64>, _| DMatrix::identity(n, n)),
            bounds,
        )
        .with_mixed_grad(Box::new(move |_: &DVector<f64>, t| rate(t)))
    }

    fn cosine_lifted(graph: CommGraph, n: usize, params: &[(f64, f64)]) -> LiftedProblem {
        let nodes: Vec<NodeObjective> = params
            .iter()
            .map(|&(amp, phase)| cosine_node(n, amp, 1.0, phase))
            .collect();
        build_lifted(graph, nodes, n).unwrap()
    }

    #[test]
    fn path_incidence_matches_hand_matrix() {
        let g = path_graph(3);
        let a = g.incidence(1);
        let expected = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0]);
        assert_eq!(a, expected);
        let cs = analyze_constraints(a, DVector::zeros(2), DEFAULT_RANK_TOL).unwrap();
        // Path Laplacian spectrum {3, 1, 0} → σ_max = √3, σ_min⁺ = 1.
        assert_relative_eq!(cs.sigma_max(), 3.0_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(cs.kappa_a(), 3.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn single_edge_and_triangle_ranks() {
        let g = CommGraph::new(2, &[(0, 1)]).unwrap();
        let cs = analyze_constraints(g.incidence(1), DVector::zeros(1), DEFAULT_RANK_TOL)
            .unwrap();
        assert_eq!(cs.rank(), 1);

        // The triangle's cycle adds a dependent row: 3 edges, rank 2.
        let g = CommGraph::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let inc = g.incidence(1);
        assert_eq!(inc.nrows(), 3);
        let cs = analyze_constraints(inc, DVector::zeros(3), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(cs.rank(), 2);
    }

    #[test]
    fn graph_validation_rejects_bad_inputs() {
        assert!(matches!(
            CommGraph::new(4, &[(0, 1), (2, 3)]),
            Err(SolverError::DisconnectedGraph)
        ));
        assert!(CommGraph::new(3, &[(0, 0), (1, 2)]).is_err());
        assert!(CommGraph::new(3, &[(0, 5), (1, 2)]).is_err());
        assert!(CommGraph::new(1, &[]).is_err());
        // Duplicates (in either orientation) collapse.
        let g = CommGraph::new(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn lifted_constants_aggregate_by_block_structure() {
        let g = CommGraph::new(2, &[(0, 1)]).unwrap();
        let mk = |m, l, c0, c1, c2, c3| {
            NodeObjective::new(
                Box::new(|y: &DVector<f64>, _| y.clone()),
                Box::new(|_: &DVector<f64>, _| DMatrix::identity(1, 1)),
                SmoothnessBounds::new(m, l).unwrap().with_drift(c0, c1, c2, c3).unwrap(),
            )
        };
        let lifted =
            build_lifted(g, vec![mk(1.0, 2.0, 3.0, 0.5, 0.2, 4.0), mk(0.5, 1.5, 4.0, 0.7, 0.1, 3.0)], 1)
                .unwrap();
        let b = lifted.bounds();
        assert_eq!(b.m, 0.5);
        assert_eq!(b.l, 2.0);
        assert_relative_eq!(b.c0, 5.0, epsilon = 1e-12); // √(9+16)
        assert_relative_eq!(b.c3, 5.0, epsilon = 1e-12);
        assert_eq!(b.c1, 0.7);
        assert_eq!(b.c2, 0.2);
        // Wrong node count is rejected.
        let g = CommGraph::new(2, &[(0, 1)]).unwrap();
        assert!(build_lifted(g, vec![mk(1.0, 1.0, 0.0, 0.0, 0.0, 0.0)], 1).is_err());
    }

    fn adupc_cfg(p: usize, c: usize, h: f64, k_max: usize) -> TrackerConfig {
        let mut cfg = TrackerConfig::new(0.2, 0.2, p, c, h, k_max);
        cfg.inner_tol = 1e-12;
        cfg
    }

    #[test]
    fn distributed_matches_centralized_on_two_nodes() {
        let g = CommGraph::new(2, &[(0, 1)]).unwrap();
        let lifted = cosine_lifted(g, 1, &[(1.5, 0.3), (0.7, 2.1)]);
        let cfg = adupc_cfg(5, 2, 0.1, 60);
        let init = PrimalDualState::zeros(2, 1, 0.0);

        let (dist, _) = simulate_distributed_adupc(&lifted, &cfg, &init, None).unwrap();
        let central = run_adupc(&lifted.centralized_problem(), &cfg, &init, None).unwrap();

        assert_eq!(dist.log.len(), central.log.len());
        for (a, b) in dist.log.steps.iter().zip(central.log.steps.iter()) {
            assert!((&a.x - &b.x).amax() < 1e-10, "primal mismatch at k={}", a.k);
            assert!((&a.lambda - &b.lambda).amax() < 1e-10, "dual mismatch at k={}", a.k);
        }
    }

    #[test]
    fn communication_budget_is_exact() {
        // Star graph: degrees 3,1,1,1; local dimension 2; P = 3, C = 3.
        let g = CommGraph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let lifted = cosine_lifted(g, 2, &[(1.0, 0.0), (0.5, 1.0), (0.8, 2.0), (0.3, 3.0)]);
        let cfg = adupc_cfg(3, 3, 0.1, 5);
        let init = PrimalDualState::zeros(8, 6, 0.0);
        let (_, comm) = simulate_distributed_adupc(&lifted, &cfg, &init, None).unwrap();

        for k in 1..=5 {
            for node in 0..4 {
                let expected = (3 + 3) * lifted.graph().degree(node) * 2;
                assert_eq!(comm.scalars_sent(k, node), Some(expected));
            }
        }
        // Hub: (P+C)·N_i·n = 6·3·2 = 36.
        assert_eq!(comm.scalars_sent(1, 0), Some(36));
    }

    #[test]
    fn time_invariant_consensus_reaches_the_average() {
        // Static targets aᵢ: the consensus optimizer of Σ½(yᵢ−aᵢ)² is the
        // mean of the targets.
        let g = CommGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let targets = [2.0, -1.0, 0.5];
        let nodes: Vec<NodeObjective> = targets
            .iter()
            .map(|&a| {
                NodeObjective::new(
                    Box::new(move |y: &DVector<f64>, _| {
                        y - DVector::from_element(1, a)
                    }),
                    Box::new(|_: &DVector<f64>, _| DMatrix::identity(1, 1)),
                    SmoothnessBounds::new(1.0, 1.0).unwrap(),
                )
                .with_mixed_grad(Box::new(|_: &DVector<f64>, _| DVector::zeros(1)))
            })
            .collect();
        let lifted = build_lifted(g, nodes, 1).unwrap();
        let cfg = adupc_cfg(2, 3, 0.1, 80);
        let init = PrimalDualState::zeros(3, 2, 0.0);
        let (run, _) = simulate_distributed_adupc(&lifted, &cfg, &init, None).unwrap();

        let mean: f64 = targets.iter().sum::<f64>() / 3.0;
        let last = run.log.last().unwrap();
        for i in 0..3 {
            assert!((last.x[i] - mean).abs() < 1e-6, "node {i}: {} vs {mean}", last.x[i]);
        }
    }

    #[test]
    fn nodes_touch_only_local_data() {
        // Every oracle checks it is handed a local-dimension vector and
        // counts its invocations; with the exact derivative mode each node's
        // mixed oracle fires exactly once per time step.
        static GRAD_CALLS: [AtomicUsize; 2] = [AtomicUsize::new(0), AtomicUsize::new(0)];
        static MIXED_CALLS: [AtomicUsize; 2] = [AtomicUsize::new(0), AtomicUsize::new(0)];

        let node = |i: usize| {
            NodeObjective::new(
                Box::new(move |y: &DVector<f64>, t: f64| {
                    assert_eq!(y.len(), 1, "node oracle must see only its local variable");
                    GRAD_CALLS[i].fetch_add(1, Ordering::Relaxed);
                    y - DVector::from_element(1, (t + i as f64).cos())
                }),
                Box::new(|y: &DVector<f64>, _| {
                    assert_eq!(y.len(), 1);
                    DMatrix::identity(1, 1)
                }),
                SmoothnessBounds::new(1.0, 1.0).unwrap(),
            )
            .with_mixed_grad(Box::new(move |y: &DVector<f64>, t: f64| {
                assert_eq!(y.len(), 1);
                MIXED_CALLS[i].fetch_add(1, Ordering::Relaxed);
                DVector::from_element(1, (t + i as f64).sin())
            }))
        };
        let g = CommGraph::new(2, &[(0, 1)]).unwrap();
        let lifted = build_lifted(g, vec![node(0), node(1)], 1).unwrap();
        let k_max = 12;
        let cfg = adupc_cfg(4, 2, 0.1, k_max);
        let init = PrimalDualState::zeros(2, 1, 0.0);
        simulate_distributed_adupc(&lifted, &cfg, &init, None).unwrap();

        for i in 0..2 {
            assert_eq!(MIXED_CALLS[i].load(Ordering::Relaxed), k_max);
            assert!(GRAD_CALLS[i].load(Ordering::Relaxed) >= k_max);
        }
    }

    #[test]
    fn rejects_non_local_configurations() {
        let g = CommGraph::new(2, &[(0, 1)]).unwrap();
        let lifted = cosine_lifted(g, 1, &[(1.0, 0.0), (0.5, 1.0)]);
        let init = PrimalDualState::zeros(2, 1, 0.0);
        let mut cfg = adupc_cfg(2, 2, 0.1, 2);
        cfg.prediction_mode = PredictionMode::ExactKkt;
        assert!(simulate_distributed_adupc(&lifted, &cfg, &init, None).is_err());
        let mut cfg = adupc_cfg(2, 2, 0.1, 2);
        cfg.strategy = Strategy::CorrectionOnly;
        assert!(simulate_distributed_adupc(&lifted, &cfg, &init, None).is_err());
        let cfg = adupc_cfg(2, 2, 0.1, 2);
        let bad_init = PrimalDualState::zeros(3, 1, 0.0);
        assert!(matches!(
            simulate_distributed_adupc(&lifted, &cfg, &bad_init, None),
            Err(SolverError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn backward_difference_skips_first_step_prediction() {
        let g = CommGraph::new(2, &[(0, 1)]).unwrap();
        // Nodes without mixed oracles: only the backward-difference mode works.
        let nodes: Vec<NodeObjective> = [(1.5, 0.3), (0.7, 2.1)]
            .iter()
            .map(|&(amp, phase): &(f64, f64)| {
                NodeObjective::new(
                    Box::new(move |y: &DVector<f64>, t: f64| {
                        y - DVector::from_element(1, amp * (t + phase).cos())
                    }),
                    Box::new(|_: &DVector<f64>, _| DMatrix::identity(1, 1)),
                    SmoothnessBounds::new(1.0, 1.0).unwrap(),
                )
            })
            .collect();
        let lifted = build_lifted(g, nodes, 1).unwrap();
        let mut cfg = adupc_cfg(6, 2, 0.05, 200);
        cfg.derivative_mode = DerivativeMode::BackwardDifference;
        let init = PrimalDualState::zeros(2, 1, 0.0);
        let (run, comm) =
            simulate_distributed_adupc(&lifted, &cfg, &init, Some(1e-12)).unwrap();
        // First step: correction-only traffic; afterwards the full budget.
        assert_eq!(comm.scalars_sent(1, 0), Some(2 * 1 * 1));
        assert_eq!(comm.scalars_sent(2, 0), Some((6 + 2) * 1 * 1));
        let (pe, _) = run.log.tail_max_errors(0.5).unwrap();
        assert!(pe < 5e-3, "tracking error {pe}");
    }
}
