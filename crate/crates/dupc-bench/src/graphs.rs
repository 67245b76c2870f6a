//! Communication-graph generation and the edge-list file format.
//!
//! Format: plain text, one `i j` pair per line (0-indexed node ids,
//! whitespace separated), `#` starts a comment. Writers emit a
//! `# nodes: N` header so isolated trailing nodes survive a round trip.

use std::fs;
use std::path::Path;

use dupc_core::distributed::CommGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BenchError, Result};

/// Resampling cap for the connected Erdős–Rényi generator.
const MAX_ATTEMPTS: u64 = 10_000;

/// Seeded Erdős–Rényi graph with edge probability
/// `expected_degree / (n_nodes − 1)`, resampled (on fresh deterministic RNG
/// streams) until connected.
pub fn gen_erdos_renyi(n_nodes: usize, expected_degree: f64, seed: u64) -> Result<CommGraph> {
    if n_nodes < 2 {
        return Err(BenchError::Config("graph needs at least two nodes".into()));
    }
    if !(expected_degree > 0.0) {
        return Err(BenchError::Config("expected degree must be positive".into()));
    }
    let p = (expected_degree / (n_nodes as f64 - 1.0)).min(1.0);
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let mut edges = Vec::new();
        for i in 0..n_nodes {
            for j in (i + 1)..n_nodes {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        if let Ok(g) = CommGraph::new(n_nodes, &edges) {
            return Ok(g);
        }
    }
    Err(BenchError::Config(format!(
        "no connected graph found for N={n_nodes}, degree={expected_degree} \
         within {MAX_ATTEMPTS} attempts"
    )))
}

/// Path graph 0–1–…–(N−1).
pub fn gen_path(n_nodes: usize) -> Result<CommGraph> {
    let edges: Vec<(usize, usize)> = (0..n_nodes.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    CommGraph::new(n_nodes, &edges).map_err(BenchError::from)
}

/// Complete graph on N nodes.
pub fn gen_complete(n_nodes: usize) -> Result<CommGraph> {
    let mut edges = Vec::new();
    for i in 0..n_nodes {
        for j in (i + 1)..n_nodes {
            edges.push((i, j));
        }
    }
    CommGraph::new(n_nodes, &edges).map_err(BenchError::from)
}

/// Serialize a graph as an edge-list file.
pub fn write_edge_list(path: &Path, graph: &CommGraph) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# nodes: {}\n", graph.n_nodes()));
    for &(i, j) in graph.edges() {
        out.push_str(&format!("{i} {j}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Parse an edge-list file. The node count comes from a `# nodes: N` header
/// when present, otherwise from the largest endpoint seen.
pub fn read_edge_list(path: &Path) -> Result<CommGraph> {
    let text = fs::read_to_string(path)?;
    let mut declared_nodes: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("nodes:") {
                declared_nodes = Some(rest.trim().parse().map_err(|_| {
                    BenchError::Config(format!("{}:{}: bad node count", path.display(), lineno + 1))
                })?);
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(BenchError::Config(format!(
                "{}:{}: expected `i j`, got {line:?}",
                path.display(),
                lineno + 1
            )));
        };
        let parse = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| {
                BenchError::Config(format!(
                    "{}:{}: bad node id {s:?}",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        edges.push((parse(a)?, parse(b)?));
    }
    let n_nodes = declared_nodes
        .unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
    CommGraph::new(n_nodes, &edges).map_err(BenchError::from)
}
