//! Louvain modularity optimization from an arbitrary starting partition.
//!
//! Each level sweeps vertices in a seeded random order (reshuffled every
//! pass), greedily moving a vertex to the neighboring community with the
//! best modularity gain; a move must improve Q by more than `min_delta_q`
//! to be accepted, and a fresh empty community is always among the
//! candidates so the final state is locally optimal against isolation too.
//! When a level goes quiet, communities are collapsed to single vertices
//! (internal weight becomes a self-loop, preserving Q) and the sweep
//! repeats one level up.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::partition::{modularity, quotient_graph, Partition, PartitionError};

/// Knobs for a single optimizer run.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LouvainConfig {
    /// Minimum Q improvement for a move to be accepted.
    pub min_delta_q: f64,
    /// Cap on aggregation levels (at least one sweep always runs).
    pub max_levels: usize,
    /// Seed for the per-pass scan-order shuffle.
    pub rng_seed: u64,
    /// When false, vertices are scanned in ascending id order instead of a
    /// seeded shuffle. The shuffle is the default: runs started from
    /// different seeds then explore different local optima.
    pub shuffle: bool,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            min_delta_q: 1e-9,
            max_levels: 64,
            rng_seed: 0,
            shuffle: true,
        }
    }
}

/// Outcome of one optimizer run.
#[derive(Clone, Debug)]
pub struct LouvainResult {
    pub partition: Partition,
    /// Modularity of `partition`, recomputed from scratch at the end.
    pub q: f64,
    /// Number of local-move sweeps (aggregation levels) executed.
    pub levels: usize,
    /// Total accepted single-vertex moves across all levels.
    pub moves: u64,
}

/// Modularity change from moving `v` to `target`, where
/// `target == partition.community_count()` denotes a fresh empty community.
/// Everything else stays put; the current assignment is read from
/// `partition`.
pub fn delta_q_move(
    graph: &Graph,
    partition: &Partition,
    v: u32,
    target: u32,
) -> Result<f64, PartitionError> {
    if partition.labels().len() != graph.vertex_count() {
        return Err(PartitionError::SizeMismatch {
            labels: partition.labels().len(),
            vertices: graph.vertex_count(),
        });
    }
    let communities = partition.community_count();
    if target as usize > communities {
        return Err(PartitionError::TargetOutOfRange {
            target,
            communities,
        });
    }
    let a = partition.community_of(v);
    if target == a {
        return Ok(0.0);
    }
    let m_w = graph.edge_weight_total();
    let k_v = graph.degree(v);
    let (mut k_in_a, mut k_in_t) = (0.0, 0.0);
    for &(u, w) in graph.neighbors(v) {
        if u == v {
            continue; // self-loops travel with the vertex
        }
        let c = partition.community_of(u);
        if c == a {
            k_in_a += w;
        } else if c == target {
            k_in_t += w;
        }
    }
    let sigma_a_rest = partition.sigma_tot(a) - k_v;
    let sigma_t = if (target as usize) < communities {
        partition.sigma_tot(target)
    } else {
        0.0
    };
    Ok((k_in_t - k_in_a) / m_w - k_v * (sigma_t - sigma_a_rest) / (2.0 * m_w * m_w))
}

/// Mutable sweep state: community labels plus the running tallies the gain
/// formula needs. Community ids may grow sparse as moves empty communities;
/// freed ids are recycled so arrays stay O(n).
struct SweepState {
    labels: Vec<u32>,
    sigma_tot: Vec<f64>,
    size: Vec<u32>,
    free: Vec<u32>,
    next_id: u32,
}

impl SweepState {
    fn from_dense_labels(graph: &Graph, labels: Vec<u32>, communities: usize) -> SweepState {
        let cap = graph.vertex_count() + 1;
        let mut sigma_tot = vec![0.0; cap];
        let mut size = vec![0u32; cap];
        for (v, &c) in labels.iter().enumerate() {
            sigma_tot[c as usize] += graph.degree(v as u32);
            size[c as usize] += 1;
        }
        SweepState {
            labels,
            sigma_tot,
            size,
            free: Vec::new(),
            next_id: communities as u32,
        }
    }

    fn alloc_community(&mut self) -> u32 {
        if let Some(id) = self.free.pop() {
            id
        } else {
            self.next_id += 1;
            self.next_id - 1
        }
    }
}

/// One level of local moves. Returns the number of accepted moves; the
/// level is done when a full pass accepts none.
fn local_move_sweep(
    graph: &Graph,
    state: &mut SweepState,
    rng: &mut ChaCha8Rng,
    cfg: &LouvainConfig,
) -> u64 {
    let n = graph.vertex_count();
    let m_w = graph.edge_weight_total();
    let two_m_sq = 2.0 * m_w * m_w;
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut comm_w = vec![0.0f64; n + 1];
    let mut touched: Vec<u32> = Vec::new();
    let mut total_moves = 0u64;

    loop {
        if cfg.shuffle {
            order.shuffle(rng);
        }
        let mut pass_moves = 0u64;
        for &v in &order {
            let a = state.labels[v as usize];
            let k_v = graph.degree(v);

            touched.clear();
            for &(u, w) in graph.neighbors(v) {
                if u == v {
                    continue;
                }
                let c = state.labels[u as usize];
                if comm_w[c as usize] == 0.0 {
                    touched.push(c);
                }
                comm_w[c as usize] += w;
            }
            // Ascending candidate order + strict improvement comparison:
            // the lowest community id wins gain ties.
            touched.sort_unstable();

            let sigma_a_rest = state.sigma_tot[a as usize] - k_v;
            let remove_gain = -comm_w[a as usize] / m_w + sigma_a_rest * k_v / two_m_sq;

            let mut best_gain = cfg.min_delta_q;
            let mut best: Option<u32> = None;
            for &c in &touched {
                if c == a {
                    continue;
                }
                let gain = remove_gain + comm_w[c as usize] / m_w
                    - state.sigma_tot[c as usize] * k_v / two_m_sq;
                if gain > best_gain {
                    best_gain = gain;
                    best = Some(c);
                }
            }
            // Fresh empty community: only meaningful when v has company. It
            // carries the highest possible id, so it never wins a tie.
            let isolate = state.size[a as usize] > 1 && remove_gain > best_gain;

            for &c in &touched {
                comm_w[c as usize] = 0.0;
            }

            if isolate || best.is_some() {
                let target = if isolate {
                    state.alloc_community()
                } else {
                    best.expect("candidate checked above")
                };
                state.sigma_tot[a as usize] -= k_v;
                state.size[a as usize] -= 1;
                if state.size[a as usize] == 0 {
                    state.free.push(a);
                }
                state.sigma_tot[target as usize] += k_v;
                state.size[target as usize] += 1;
                state.labels[v as usize] = target;
                pass_moves += 1;
            }
        }
        total_moves += pass_moves;
        if pass_moves == 0 {
            return total_moves;
        }
    }
}

/// Runs Louvain from `start` and returns the refined partition. The result
/// is locally optimal: at termination no single-vertex move to a
/// neighboring or empty community gains more than `min_delta_q`.
pub fn louvain(
    graph: &Graph,
    start: &Partition,
    cfg: &LouvainConfig,
) -> Result<LouvainResult, PartitionError> {
    if start.labels().len() != graph.vertex_count() {
        return Err(PartitionError::SizeMismatch {
            labels: start.labels().len(),
            vertices: graph.vertex_count(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let max_levels = cfg.max_levels.max(1);

    // Community of each original vertex, kept composed across levels.
    let mut assign: Vec<u32> = start.labels().to_vec();
    let mut levels = 0usize;
    let mut total_moves = 0u64;

    // Aggregation can reopen vertex-level moves: merging communities
    // changes the neighborhoods single vertices compare against. So the
    // multi-level episode repeats from the flat assignment until its very
    // first (vertex-level) sweep goes quiet. Each accepted move raises Q
    // by more than min_delta_q, so the outer loop terminates.
    'episodes: loop {
        let flat = Partition::from_labels(graph, &assign)?;
        let mut owned: Option<Graph> = None;
        let mut state =
            SweepState::from_dense_labels(graph, flat.labels().to_vec(), flat.community_count());
        let mut episode_level = 0usize;
        loop {
            let level_graph = owned.as_ref().unwrap_or(graph);
            let moves = local_move_sweep(level_graph, &mut state, &mut rng, cfg);
            levels += 1;
            episode_level += 1;
            total_moves += moves;
            if moves == 0 {
                if episode_level == 1 {
                    break 'episodes; // no single-vertex move gains: done
                }
                break;
            }
            let level_part = Partition::from_labels(level_graph, &state.labels)?;
            if episode_level == 1 {
                assign.copy_from_slice(level_part.labels());
            } else {
                for slot in assign.iter_mut() {
                    *slot = level_part.labels()[*slot as usize];
                }
            }
            if levels >= max_levels {
                break 'episodes;
            }
            if level_part.community_count() == level_graph.vertex_count() {
                break; // nothing aggregated; re-check at the vertex level
            }
            let next = quotient_graph(level_graph, &level_part);
            state = SweepState::from_dense_labels(
                &next,
                (0..next.vertex_count() as u32).collect(),
                next.vertex_count(),
            );
            owned = Some(next);
        }
    }

    let partition = Partition::from_labels(graph, &assign)?;
    let q = modularity(graph, &partition)?;
    Ok(LouvainResult {
        partition,
        q,
        levels,
        moves: total_moves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;
    use rand::Rng;

    fn graph(text: &str) -> Graph {
        parse_edge_list(text.as_bytes(), "<test>").unwrap().0
    }

    fn two_triangles() -> Graph {
        graph("a b\nb c\nc a\nd e\ne f\nf d\n")
    }

    /// Erdos-Renyi-ish test graph, guaranteed non-empty and loop-free.
    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for a in 0..n as u32 {
            for b in (a + 1)..n as u32 {
                if rng.gen::<f64>() < p {
                    edges.push((a, b, 1.0));
                }
            }
        }
        if edges.is_empty() {
            edges.push((0, 1, 1.0));
        }
        let ids = (0..n).map(|i| i.to_string()).collect();
        Graph::from_weighted_edges(ids, edges).unwrap()
    }

    #[test]
    fn splits_two_triangles_from_singletons() {
        let g = two_triangles();
        let res = louvain(&g, &Partition::singletons(&g), &LouvainConfig::default()).unwrap();
        assert_eq!(res.partition.community_count(), 2);
        assert_eq!(res.q, 0.5);
        assert_eq!(res.partition.community_of(0), res.partition.community_of(1));
        assert_eq!(res.partition.community_of(3), res.partition.community_of(4));
    }

    #[test]
    fn optimal_start_makes_zero_moves() {
        let g = two_triangles();
        let optimum = Partition::from_labels(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        let res = louvain(&g, &optimum, &LouvainConfig::default()).unwrap();
        assert_eq!(res.moves, 0);
        assert_eq!(res.partition, optimum);
        assert_eq!(res.levels, 1);
    }

    #[test]
    fn clique_barbell_finds_the_cliques() {
        // Two 5-cliques joined by a single bridge edge.
        let mut edges = Vec::new();
        for base in [0u32, 5u32] {
            for i in 0..5 {
                for j in (i + 1)..5 {
                    edges.push((base + i, base + j, 1.0));
                }
            }
        }
        edges.push((0, 5, 1.0));
        let ids = (0..10).map(|i| i.to_string()).collect();
        let g = Graph::from_weighted_edges(ids, edges).unwrap();
        let res = louvain(&g, &Partition::singletons(&g), &LouvainConfig::default()).unwrap();
        assert_eq!(res.partition.community_count(), 2);
        for v in 1..5 {
            assert_eq!(res.partition.community_of(v), res.partition.community_of(0));
        }
        for v in 6..10 {
            assert_eq!(res.partition.community_of(v), res.partition.community_of(5));
        }
    }

    #[test]
    fn identical_seed_gives_identical_result() {
        let g = random_graph(60, 0.1, 7);
        let start = Partition::singletons(&g);
        let cfg = LouvainConfig { rng_seed: 99, ..LouvainConfig::default() };
        let a = louvain(&g, &start, &cfg).unwrap();
        let b = louvain(&g, &start, &cfg).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.q.to_bits(), b.q.to_bits());
        assert_eq!(a.moves, b.moves);
    }

    #[test]
    fn q_is_monotone_in_the_level_cap() {
        // Truncating the run after k levels replays the same trajectory, so
        // Q as a function of the cap must be non-decreasing.
        for seed in 0..5 {
            let g = random_graph(80, 0.08, seed);
            let start = Partition::singletons(&g);
            let mut prev = f64::NEG_INFINITY;
            for cap in 1..=6 {
                let cfg = LouvainConfig {
                    max_levels: cap,
                    rng_seed: seed,
                    ..LouvainConfig::default()
                };
                let res = louvain(&g, &start, &cfg).unwrap();
                assert!(
                    res.q >= prev - 1e-12,
                    "seed {seed}: cap {cap} gave {} after {prev}",
                    res.q
                );
                prev = res.q;
            }
        }
    }

    #[test]
    fn termination_is_locally_optimal() {
        for seed in 0..10 {
            let g = random_graph(50, 0.12, seed);
            let start = Partition::singletons(&g);
            let cfg = LouvainConfig { rng_seed: seed, ..LouvainConfig::default() };
            let res = louvain(&g, &start, &cfg).unwrap();
            let part = &res.partition;
            for v in 0..g.vertex_count() as u32 {
                let mut targets: Vec<u32> = g
                    .neighbors(v)
                    .iter()
                    .map(|&(u, _)| part.community_of(u))
                    .collect();
                targets.push(part.community_count() as u32); // fresh community
                for t in targets {
                    let dq = delta_q_move(&g, part, v, t).unwrap();
                    assert!(
                        dq <= cfg.min_delta_q + 1e-15,
                        "seed {seed}: vertex {v} -> {t} still gains {dq}"
                    );
                }
            }
        }
    }

    #[test]
    fn delta_q_matches_scratch_recomputation() {
        // Random single moves on random graphs against the from-scratch Q
        // difference.
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for trial in 0..1000 {
            let g = random_graph(30, 0.15, trial);
            let n = g.vertex_count();
            // Random partition with up to 6 communities.
            let raw: Vec<u32> = (0..n).map(|_| rng.gen_range(0..6u32)).collect();
            let part = Partition::from_labels(&g, &raw).unwrap();
            let v = rng.gen_range(0..n as u32);
            let target = rng.gen_range(0..=part.community_count() as u32);
            let dq = delta_q_move(&g, &part, v, target).unwrap();
            let before = modularity(&g, &part).unwrap();
            let after = modularity(&g, &part.with_move(&g, v, target).unwrap()).unwrap();
            assert!(
                (after - before - dq).abs() < 1e-12,
                "trial {trial}: dq {dq} vs scratch {}",
                after - before
            );
        }
    }

    #[test]
    fn delta_q_rejects_bad_target() {
        let g = two_triangles();
        let part = Partition::from_labels(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!(delta_q_move(&g, &part, 0, 5).is_err());
        assert_eq!(delta_q_move(&g, &part, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn ascending_scan_order_is_available() {
        let g = two_triangles();
        let cfg = LouvainConfig { shuffle: false, ..LouvainConfig::default() };
        let a = louvain(&g, &Partition::singletons(&g), &cfg).unwrap();
        let b = louvain(&g, &Partition::singletons(&g), &cfg).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.q, 0.5);
    }

    #[test]
    fn handles_self_loop_graphs() {
        // Aggregated graphs carry self-loops; the sweep must treat them as
        // baggage that moves with the vertex.
        let g = Graph::from_weighted_edges(
            vec!["0".into(), "1".into(), "2".into()],
            vec![(0, 0, 3.0), (0, 1, 1.0), (1, 2, 1.0), (2, 2, 2.0)],
        )
        .unwrap();
        let res = louvain(&g, &Partition::singletons(&g), &LouvainConfig::default()).unwrap();
        let check = modularity(&g, &res.partition).unwrap();
        assert!((res.q - check).abs() < 1e-12);
    }
}
