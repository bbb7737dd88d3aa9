//! Seed-set expansion scores over a partition ensemble.
//!
//! The expansion score of vertex `i` against seed set `S` is the fraction
//! of (partition, seed) pairs in which `i` lands in the same community as
//! the seed:
//!
//! `mu_i(S) = (1 / (P * |S|)) * sum_r sum_{j in S} [c_r(i) == c_r(j)]`
//!
//! Seeds are scored against the set without themselves, `mu_i(S \ {i})`,
//! so a seed's score reflects cohesion with the rest of the set rather
//! than trivial self-agreement. Scores are exact rationals: integer
//! co-clustering counts divided once at the end.

use crate::ensemble::EnsembleIndex;
use crate::graph::Graph;

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("seed vertex {0} out of range (n = {1})")]
    SeedOutOfRange(u32, usize),
}

/// A validated, deduplicated seed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySet {
    seeds: Vec<u32>,
}

impl QuerySet {
    /// Sorts and deduplicates; rejects empty sets and out-of-range ids.
    pub fn new(mut seeds: Vec<u32>, n: usize) -> Result<QuerySet, QueryError> {
        if seeds.is_empty() {
            return Err(QueryError::EmptySeeds);
        }
        if let Some(&bad) = seeds.iter().find(|&&s| s as usize >= n) {
            return Err(QueryError::SeedOutOfRange(bad, n));
        }
        seeds.sort_unstable();
        seeds.dedup();
        Ok(QuerySet { seeds })
    }

    pub fn seeds(&self) -> &[u32] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.seeds.binary_search(&v).is_ok()
    }
}

/// Per-vertex expansion scores for one query.
#[derive(Clone, Debug)]
pub struct QueryResult {
    pub scores: Vec<f64>,
    pub is_seed: Vec<bool>,
    pub seeds: QuerySet,
    /// Ensemble size the scores were computed over.
    pub partition_count: usize,
}

/// Scores every vertex against the seed set. One pass per partition:
/// count seeds per community, then credit each vertex with the seeds in
/// its community (its own membership subtracted for seeds). Runs in
/// `O(P * (n + |S|))`.
pub fn expansion_scores(index: &EnsembleIndex, query: &QuerySet) -> Result<QueryResult, QueryError> {
    let n = index.vertex_count();
    if let Some(&bad) = query.seeds().iter().find(|&&s| s as usize >= n) {
        return Err(QueryError::SeedOutOfRange(bad, n));
    }
    let p = index.partition_count();
    let s = query.len();

    let mut counts = vec![0u64; n];
    let mut seeds_in_community = vec![0u32; n];
    for r in 0..p {
        let labels = index.partition(r);
        for &seed in query.seeds() {
            seeds_in_community[labels[seed as usize] as usize] += 1;
        }
        for v in 0..n {
            counts[v] += u64::from(seeds_in_community[labels[v] as usize]);
        }
        for &seed in query.seeds() {
            seeds_in_community[labels[seed as usize] as usize] = 0;
        }
    }

    let mut is_seed = vec![false; n];
    for &seed in query.seeds() {
        is_seed[seed as usize] = true;
    }
    let scores = (0..n)
        .map(|v| {
            if is_seed[v] {
                if s == 1 {
                    // A lone seed has no peers to agree with; score it
                    // perfectly cohesive by convention.
                    1.0
                } else {
                    // Exclude the seed's trivial self-membership.
                    (counts[v] - p as u64) as f64 / (p * (s - 1)) as f64
                }
            } else {
                counts[v] as f64 / (p * s) as f64
            }
        })
        .collect();

    Ok(QueryResult {
        scores,
        is_seed,
        seeds: query.clone(),
        partition_count: p,
    })
}

/// Ranks vertices by score (descending; ties by ascending vertex id) and
/// reports original ids. Seeds are filtered out unless `include_seeds`;
/// `top_k = None` returns everything.
pub fn rank_query(
    graph: &Graph,
    result: &QueryResult,
    include_seeds: bool,
    top_k: Option<usize>,
) -> Vec<(String, f64)> {
    rank_scores(
        graph.original_ids(),
        &result.scores,
        &result.is_seed,
        include_seeds,
        top_k,
    )
}

/// The ranking behind [`rank_query`], usable with any score vector and id
/// table (e.g. walk scores, or an index loaded without its graph).
pub fn rank_scores(
    ids: &[String],
    scores: &[f64],
    is_seed: &[bool],
    include_seeds: bool,
    top_k: Option<usize>,
) -> Vec<(String, f64)> {
    let mut order: Vec<u32> = (0..scores.len() as u32)
        .filter(|&v| include_seeds || !is_seed[v as usize])
        .collect();
    order.sort_by(|&a, &b| {
        scores[b as usize]
            .total_cmp(&scores[a as usize])
            .then(a.cmp(&b))
    });
    if let Some(k) = top_k {
        order.truncate(k);
    }
    order
        .into_iter()
        .map(|v| (ids[v as usize].clone(), scores[v as usize]))
        .collect()
}

/// Mean exclusion score over the seeds: how tightly the seed set clusters
/// with itself. `None` for single-seed queries (no peers to measure).
pub fn seed_cohesion(result: &QueryResult) -> Option<f64> {
    if result.seeds.len() < 2 {
        return None;
    }
    let total: f64 = result
        .seeds
        .seeds()
        .iter()
        .map(|&s| result.scores[s as usize])
        .sum();
    Some(total / result.seeds.len() as f64)
}
