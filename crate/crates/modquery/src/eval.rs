//! Cross-validation harness for seed-query methods against labelled
//! communities.
//!
//! For every labelled community and seed size `s`, seed subsets are drawn
//! (exhaustively when few enough, otherwise sampled without replacement).
//! Each subset becomes one trial: every community containing the whole
//! subset contributes its remaining members as positives, everything else
//! is negative, and the seeds themselves are excluded from scoring. Each
//! method ranks the non-seed vertices; trials yield an exact ROC (tied
//! scores grouped) and a Mann–Whitney AUC. Trials aggregate into a
//! vertically-averaged curve on a fixed FPR grid plus mean/std AUC, both
//! overall and per community.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ensemble::EnsembleIndex;
use crate::graph::{Graph, LabelSet};
use crate::hashing::{mix_seed, Fnv1a};
use crate::query::{expansion_scores, QueryError, QuerySet};
use crate::rwr::{rwr_scores, RwrConfig, RwrError};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("index covers {index} vertices but the graph has {graph}")]
    GraphIndexMismatch { index: usize, graph: usize },
    #[error("no community is large enough for any requested seed size")]
    NoEligibleTrials,
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Rwr(#[from] RwrError),
}

/// A scoring method under evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Ensemble co-clustering expansion score.
    Expansion,
    /// Random walk with restart baseline.
    Rwr,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Expansion => "expansion",
            Method::Rwr => "rwr",
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct EvalConfig {
    pub seed_sizes: Vec<usize>,
    /// Per (community, seed size): exhaustive below this, sampling above.
    pub max_subsets: usize,
    pub rng_seed: u64,
    /// Number of FPR grid points for the averaged curve (including 0, 1).
    pub roc_grid_points: usize,
    pub methods: Vec<Method>,
    pub rwr: RwrConfig,
}

impl Default for EvalConfig {
    fn default() -> EvalConfig {
        EvalConfig {
            seed_sizes: vec![3, 7, 15],
            max_subsets: 120,
            rng_seed: 0,
            roc_grid_points: 1001,
            methods: vec![Method::Expansion, Method::Rwr],
            rwr: RwrConfig::default(),
        }
    }
}

/// One cross-validation unit: a seed subset with its induced labels.
#[derive(Clone, Debug)]
pub struct QueryTrial {
    pub community: String,
    pub seeds: Vec<u32>,
    /// Union of every community containing all seeds, minus the seeds.
    pub positives: Vec<u32>,
    pub negatives: Vec<u32>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CommunityAuc {
    pub label: String,
    pub mean_auc: f64,
    pub n_trials: usize,
}

/// Aggregated result for one (method, seed size) cell.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RocSummary {
    pub method: Method,
    pub seed_size: usize,
    /// Fixed FPR grid, 0..=1.
    pub fpr: Vec<f64>,
    /// Vertically averaged TPR per grid point.
    pub mean_tpr: Vec<f64>,
    /// Mean of the per-trial Mann–Whitney AUCs.
    pub mean_auc: f64,
    /// Sample standard deviation of the per-trial AUCs.
    pub std_auc: f64,
    /// Trapezoidal area of the averaged grid curve (differs slightly
    /// from mean_auc because averaging smooths the trial curves).
    pub mean_curve_auc: f64,
    pub n_trials: usize,
    pub per_community: Vec<CommunityAuc>,
}

#[derive(Debug, Default)]
pub struct EvalReport {
    pub summaries: Vec<RocSummary>,
    /// Communities too small for a seed size, as (label, seed_size).
    pub skipped: Vec<(String, usize)>,
    /// Trials dropped for lacking positives or negatives.
    pub degenerate_trials: usize,
}

/// `C(n, k)` capped: returns `cap + 1` as soon as the count exceeds it.
fn binomial_capped(n: usize, k: usize, cap: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Multiply-then-divide keeps every intermediate an exact integer.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap {
            return cap + 1;
        }
    }
    acc
}

/// Seed subsets of `members` of size `s`: every subset in lexicographic
/// order when there are at most `max_subsets`, otherwise that many
/// distinct subsets sampled uniformly. Deterministic in `seed`.
pub fn sample_subsets(members: &[u32], s: usize, max_subsets: usize, seed: u64) -> Vec<Vec<u32>> {
    let n = members.len();
    if s == 0 || s > n {
        return Vec::new();
    }
    if binomial_capped(n, s, max_subsets as u128) <= max_subsets as u128 {
        // Exhaustive: classic index-combination enumeration.
        let mut idx: Vec<usize> = (0..s).collect();
        let mut out = Vec::new();
        loop {
            out.push(idx.iter().map(|&i| members[i]).collect());
            // Advance the rightmost index that still has room.
            let mut j = s;
            while j > 0 {
                j -= 1;
                if idx[j] != j + n - s {
                    idx[j] += 1;
                    for k in j + 1..s {
                        idx[k] = idx[k - 1] + 1;
                    }
                    break;
                }
                if j == 0 {
                    return out;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::with_capacity(max_subsets);
    while out.len() < max_subsets {
        let mut subset: Vec<u32> = rand::seq::index::sample(&mut rng, n, s)
            .iter()
            .map(|i| members[i])
            .collect();
        subset.sort_unstable();
        if seen.insert(subset.clone()) {
            out.push(subset);
        }
    }
    out
}

/// Applies the superset rule: positives are the union of every community
/// that contains the whole seed set, minus the seeds themselves.
pub fn build_trial(labels: &LabelSet, n: usize, community: &str, seeds: &[u32]) -> QueryTrial {
    let mut class = vec![0u8; n];
    for c in &labels.communities {
        if seeds.iter().all(|s| c.members.binary_search(s).is_ok()) {
            for &m in &c.members {
                class[m as usize] = 1;
            }
        }
    }
    for &s in seeds {
        class[s as usize] = 2;
    }
    let positives = (0..n as u32).filter(|&v| class[v as usize] == 1).collect();
    let negatives = (0..n as u32).filter(|&v| class[v as usize] == 0).collect();
    QueryTrial {
        community: community.to_string(),
        seeds: seeds.to_vec(),
        positives,
        negatives,
    }
}

/// ROC polyline by descending-score threshold sweep. Scores tied across
/// the positive/negative pools advance TPR and FPR in a single step, so
/// the polyline's diagonal segment carries exactly the half credit the
/// Mann–Whitney count assigns.
pub fn roc_curve(pos: &[f64], neg: &[f64]) -> Vec<(f64, f64)> {
    debug_assert!(!pos.is_empty() && !neg.is_empty());
    let mut ps = pos.to_vec();
    let mut ns = neg.to_vec();
    ps.sort_by(|a, b| b.total_cmp(a));
    ns.sort_by(|a, b| b.total_cmp(a));
    let mut points = Vec::with_capacity(ps.len() + ns.len() + 1);
    points.push((0.0, 0.0));
    let (mut i, mut j) = (0usize, 0usize);
    let (mut tp, mut fp) = (0usize, 0usize);
    while i < ps.len() || j < ns.len() {
        let threshold = match (ps.get(i), ns.get(j)) {
            (Some(&p), Some(&q)) => p.max(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < ps.len() && ps[i] == threshold {
            tp += 1;
            i += 1;
        }
        while j < ns.len() && ns[j] == threshold {
            fp += 1;
            j += 1;
        }
        points.push((fp as f64 / ns.len() as f64, tp as f64 / ps.len() as f64));
    }
    points
}

/// Trapezoidal area under a polyline of (x, y) points.
pub fn auc_trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5)
        .sum()
}

/// Mann–Whitney AUC: fraction of (positive, negative) pairs ranked
/// correctly, ties worth one half. Counted in doubled integers, so the
/// only rounding is the final division.
pub fn auc_mann_whitney(pos: &[f64], neg: &[f64]) -> f64 {
    debug_assert!(!pos.is_empty() && !neg.is_empty());
    let mut ns = neg.to_vec();
    ns.sort_by(f64::total_cmp);
    let mut twice_wins: u128 = 0;
    for &p in pos {
        let below = ns.partition_point(|&x| x < p);
        let not_above = ns.partition_point(|&x| x <= p);
        twice_wins += 2 * below as u128 + (not_above - below) as u128;
    }
    twice_wins as f64 / (2 * pos.len() as u128 * neg.len() as u128) as f64
}

/// Samples a trial polyline on the fixed FPR grid. Interior grid points
/// landing exactly on a vertical take its upper TPR; the first and last
/// grid points are pinned to (0, 0) and (1, 1) so averaged curves keep
/// the ROC endpoints.
fn grid_tpr(points: &[(f64, f64)], grid: &[f64]) -> Vec<f64> {
    // Collapse verticals: per distinct FPR keep the entering and
    // leaving TPR.
    let mut verts: Vec<(f64, f64, f64)> = Vec::with_capacity(points.len());
    for &(x, y) in points {
        match verts.last_mut() {
            Some(v) if v.0 == x => v.2 = y,
            _ => verts.push((x, y, y)),
        }
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut k = 0usize;
    for (gi, &x) in grid.iter().enumerate() {
        if gi == 0 {
            out.push(0.0);
            continue;
        }
        if gi == grid.len() - 1 {
            out.push(1.0);
            continue;
        }
        while k + 1 < verts.len() && verts[k + 1].0 <= x {
            k += 1;
        }
        let v = verts[k];
        if v.0 == x {
            out.push(v.2);
        } else {
            let w = verts[k + 1];
            let t = (x - v.0) / (w.0 - v.0);
            out.push(v.2 + t * (w.1 - v.2));
        }
    }
    out
}

/// Subset sampling is keyed by (run seed, community label, seed size), so
/// results do not depend on the order communities are listed in.
fn subset_seed(rng_seed: u64, label: &str, s: usize) -> u64 {
    let mut h = Fnv1a::new();
    h.write(label.as_bytes());
    h.write_u64(s as u64);
    mix_seed(rng_seed, h.finish())
}

/// Per-community accumulation for one (method, seed size) cell.
struct CellAcc {
    tpr_sum: Vec<f64>,
    aucs: Vec<f64>,
}

pub fn evaluate_network(
    graph: &Graph,
    index: &EnsembleIndex,
    labels: &LabelSet,
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    let n = graph.vertex_count();
    if index.vertex_count() != n {
        return Err(EvalError::GraphIndexMismatch {
            index: index.vertex_count(),
            graph: n,
        });
    }
    if cfg.seed_sizes.is_empty() || cfg.seed_sizes.contains(&0) {
        return Err(EvalError::BadConfig(
            "seed_sizes must be non-empty and positive".to_string(),
        ));
    }
    if cfg.max_subsets == 0 {
        return Err(EvalError::BadConfig("max_subsets must be positive".to_string()));
    }
    if cfg.roc_grid_points < 2 {
        return Err(EvalError::BadConfig(
            "roc_grid_points must be at least 2".to_string(),
        ));
    }
    if cfg.methods.is_empty() {
        return Err(EvalError::BadConfig("methods must be non-empty".to_string()));
    }

    let grid: Vec<f64> = (0..cfg.roc_grid_points)
        .map(|i| i as f64 / (cfg.roc_grid_points - 1) as f64)
        .collect();
    // Communities processed in label order so aggregation is independent
    // of how the label file listed them.
    let mut comm_order: Vec<usize> = (0..labels.communities.len()).collect();
    comm_order.sort_by(|&a, &b| labels.communities[a].label.cmp(&labels.communities[b].label));

    let mut report = EvalReport::default();
    for &s in &cfg.seed_sizes {
        let mut cells: Vec<Vec<CellAcc>> = Vec::new(); // [community in comm_order][method]
        let mut cell_labels: Vec<&str> = Vec::new();
        for &ci in &comm_order {
            let comm = &labels.communities[ci];
            if comm.members.len() <= s {
                report.skipped.push((comm.label.clone(), s));
                continue;
            }
            let mut accs: Vec<CellAcc> = cfg
                .methods
                .iter()
                .map(|_| CellAcc {
                    tpr_sum: vec![0.0; grid.len()],
                    aucs: Vec::new(),
                })
                .collect();
            let subsets = sample_subsets(
                &comm.members,
                s,
                cfg.max_subsets,
                subset_seed(cfg.rng_seed, &comm.label, s),
            );
            for subset in subsets {
                let trial = build_trial(labels, n, &comm.label, &subset);
                if trial.positives.is_empty() || trial.negatives.is_empty() {
                    report.degenerate_trials += 1;
                    continue;
                }
                let qset = QuerySet::new(subset, n)?;
                for (mi, &method) in cfg.methods.iter().enumerate() {
                    let scores = match method {
                        Method::Expansion => expansion_scores(index, &qset)?.scores,
                        Method::Rwr => rwr_scores(graph, &qset, &cfg.rwr)?.scores,
                    };
                    let pos: Vec<f64> = trial.positives.iter().map(|&v| scores[v as usize]).collect();
                    let neg: Vec<f64> = trial.negatives.iter().map(|&v| scores[v as usize]).collect();
                    let curve = roc_curve(&pos, &neg);
                    let tpr = grid_tpr(&curve, &grid);
                    let acc = &mut accs[mi];
                    for (sum, t) in acc.tpr_sum.iter_mut().zip(&tpr) {
                        *sum += t;
                    }
                    acc.aucs.push(auc_mann_whitney(&pos, &neg));
                }
            }
            cells.push(accs);
            cell_labels.push(&comm.label);
        }

        for (mi, &method) in cfg.methods.iter().enumerate() {
            let n_trials: usize = cells.iter().map(|c| c[mi].aucs.len()).sum();
            if n_trials == 0 {
                continue;
            }
            let mut mean_tpr = vec![0.0; grid.len()];
            let mut all_aucs: Vec<f64> = Vec::with_capacity(n_trials);
            let mut per_community = Vec::new();
            for (c, &label) in cells.iter().zip(&cell_labels) {
                let cell = &c[mi];
                if cell.aucs.is_empty() {
                    continue;
                }
                for (sum, t) in mean_tpr.iter_mut().zip(&cell.tpr_sum) {
                    *sum += t;
                }
                all_aucs.extend_from_slice(&cell.aucs);
                per_community.push(CommunityAuc {
                    label: label.to_string(),
                    mean_auc: cell.aucs.iter().sum::<f64>() / cell.aucs.len() as f64,
                    n_trials: cell.aucs.len(),
                });
            }
            for t in &mut mean_tpr {
                *t /= n_trials as f64;
            }
            let mean_auc = all_aucs.iter().sum::<f64>() / n_trials as f64;
            let std_auc = if n_trials < 2 {
                0.0
            } else {
                let var = all_aucs
                    .iter()
                    .map(|a| (a - mean_auc) * (a - mean_auc))
                    .sum::<f64>()
                    / (n_trials - 1) as f64;
                var.sqrt()
            };
            let mean_curve_auc =
                auc_trapezoid(&grid.iter().copied().zip(mean_tpr.iter().copied()).collect::<Vec<_>>());
            report.summaries.push(RocSummary {
                method,
                seed_size: s,
                fpr: grid.clone(),
                mean_tpr,
                mean_auc,
                std_auc,
                mean_curve_auc,
                n_trials,
                per_community,
            });
        }
    }
    if report.summaries.is_empty() {
        return Err(EvalError::NoEligibleTrials);
    }
    Ok(report)
}
