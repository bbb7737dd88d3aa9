//! Random walk with restart, the classical diffusion baseline for seed
//! queries.
//!
//! Power iteration on `p_{t+1} = (1 - alpha) * M * p_t + alpha * p_0`
//! where `p_0` is uniform over the seeds and `M` redistributes walker
//! mass along weighted edges. The default transition operator is the
//! column-stochastic one (each vertex sends its mass to neighbours in
//! proportion to edge weight), which conserves total probability at
//! every step. A row-stochastic variant is available for comparison;
//! it does not conserve mass on irregular graphs, so its output is
//! normalized to sum to one at the end.

use crate::graph::Graph;
use crate::query::{QueryError, QuerySet};

/// `(1 - alpha)` contraction makes the iteration converge geometrically;
/// this cap only guards against misconfiguration (e.g. tolerance 0).
const DEFAULT_MAX_ITERS: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum RwrError {
    #[error("restart probability must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Which stochastic normalization of the adjacency operator to iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Mass flows out of each vertex split by weight; total mass is
    /// conserved every step.
    #[default]
    ColumnStochastic,
    /// Each vertex averages over its in-neighbourhood instead.
    RowStochastic,
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct RwrConfig {
    /// Restart probability.
    pub alpha: f64,
    /// L1 distance between successive iterates that counts as converged.
    pub l1_tolerance: f64,
    pub max_iters: usize,
    pub orientation: Orientation,
}

impl Default for RwrConfig {
    fn default() -> RwrConfig {
        RwrConfig {
            alpha: 0.25,
            l1_tolerance: 1e-10,
            max_iters: DEFAULT_MAX_ITERS,
            orientation: Orientation::ColumnStochastic,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RwrResult {
    /// Stationary probability per vertex; sums to one.
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// Final L1 step size.
    pub residual: f64,
}

/// Runs the restart iteration from a uniform distribution over `seeds`.
pub fn rwr_scores(graph: &Graph, seeds: &QuerySet, cfg: &RwrConfig) -> Result<RwrResult, RwrError> {
    if !(cfg.alpha > 0.0 && cfg.alpha <= 1.0) {
        return Err(RwrError::BadAlpha(cfg.alpha));
    }
    let n = graph.vertex_count();
    if let Some(&bad) = seeds.seeds().iter().find(|&&s| s as usize >= n) {
        return Err(QueryError::SeedOutOfRange(bad, n).into());
    }

    let mut restart = vec![0.0; n];
    for &s in seeds.seeds() {
        restart[s as usize] = 1.0 / seeds.len() as f64;
    }

    let mut p = restart.clone();
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < cfg.max_iters {
        for (v, slot) in next.iter_mut().enumerate() {
            *slot = cfg.alpha * restart[v];
        }
        match cfg.orientation {
            Orientation::ColumnStochastic => {
                // Push mass out of each vertex along its edges.
                for v in 0..n {
                    let outflow = (1.0 - cfg.alpha) * p[v] / graph.degree(v as u32);
                    for &(u, w) in graph.neighbors(v as u32) {
                        next[u as usize] += outflow * w;
                    }
                }
            }
            Orientation::RowStochastic => {
                // Pull a weighted neighbourhood average into each vertex.
                for v in 0..n {
                    let mut pulled = 0.0;
                    for &(u, w) in graph.neighbors(v as u32) {
                        pulled += w * p[u as usize];
                    }
                    next[v] += (1.0 - cfg.alpha) * pulled / graph.degree(v as u32);
                }
            }
        }
        iterations += 1;
        residual = p
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut p, &mut next);
        if residual <= cfg.l1_tolerance {
            break;
        }
    }
    if residual > cfg.l1_tolerance {
        return Err(RwrError::NonConvergence {
            iterations,
            residual,
        });
    }

    if cfg.orientation == Orientation::ColumnStochastic {
        debug_assert!(
            (p.iter().sum::<f64>() - 1.0).abs() < 1e-12,
            "conserving operator leaked mass"
        );
    } else {
        // The averaging operator is not mass-conserving; rescale so the
        // two orientations are comparable.
        let total: f64 = p.iter().sum();
        for x in &mut p {
            *x /= total;
        }
    }

    Ok(RwrResult {
        scores: p,
        iterations,
        residual,
    })
}
