//! Vertex partitions, modularity, and the random cut-set partitions used to
//! seed optimizer runs.
//!
//! Modularity is computed in its community-summed form:
//!
//! `Q = sum_c ( W_in(c) / m_w  -  (S_tot(c) / 2 m_w)^2 )`
//!
//! where `W_in(c)` is the total weight of edges internal to community `c`
//! (self-loops counted once at full weight), `S_tot(c)` the total degree of
//! its members, and `m_w` the total edge weight. An O(n^2) literal double
//! sum over vertex pairs is kept alongside as an oracle for tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

#[derive(Debug, thiserror::Error)]
pub enum PartitionError {
    #[error("partition covers {labels} vertices but the graph has {vertices}")]
    SizeMismatch { labels: usize, vertices: usize },
    #[error("pairwise oracle is limited to 2000 vertices (got {0})")]
    OracleTooLarge(usize),
    #[error("move target {target} out of range (communities: {communities})")]
    TargetOutOfRange { target: u32, communities: usize },
}

/// A partition of a graph's vertices into communities `0..community_count`,
/// with per-community weight tallies kept alongside. Community ids are
/// dense and ordered by each community's smallest vertex id, so any
/// relabeling of the same grouping normalizes to identical state.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    labels: Vec<u32>,
    community_count: usize,
    /// Per-community total member degree (`S_tot`).
    sigma_tot: Vec<f64>,
    /// Per-community internal edge weight (`W_in`), self-loops counted once.
    sigma_in: Vec<f64>,
}

impl Partition {
    /// Normalizes arbitrary (possibly sparse) labels into a partition of
    /// `graph`. Labels are renumbered densely in order of each community's
    /// smallest vertex id.
    pub fn from_labels(graph: &Graph, raw: &[u32]) -> Result<Partition, PartitionError> {
        let n = graph.vertex_count();
        if raw.len() != n {
            return Err(PartitionError::SizeMismatch {
                labels: raw.len(),
                vertices: n,
            });
        }
        let mut dense: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
        let mut labels = vec![0u32; n];
        for v in 0..n {
            let next = dense.len() as u32;
            let id = *dense.entry(raw[v]).or_insert(next);
            labels[v] = id;
        }
        let community_count = dense.len();
        let (sigma_tot, sigma_in) = weight_tallies(graph, &labels, community_count);
        Ok(Partition {
            labels,
            community_count,
            sigma_tot,
            sigma_in,
        })
    }

    /// Every vertex in its own community.
    pub fn singletons(graph: &Graph) -> Partition {
        let labels: Vec<u32> = (0..graph.vertex_count() as u32).collect();
        Partition::from_labels(graph, &labels).expect("labels cover the graph")
    }

    /// All vertices in one community.
    pub fn all_in_one(graph: &Graph) -> Partition {
        let labels = vec![0u32; graph.vertex_count()];
        Partition::from_labels(graph, &labels).expect("labels cover the graph")
    }

    pub fn community_of(&self, v: u32) -> u32 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn sigma_tot(&self, c: u32) -> f64 {
        self.sigma_tot[c as usize]
    }

    pub fn sigma_in(&self, c: u32) -> f64 {
        self.sigma_in[c as usize]
    }

    /// Member lists, index = community id.
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.community_count];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c as usize].push(v as u32);
        }
        out
    }

    /// The partition with vertex `v` moved to community `target`, where
    /// `target == community_count()` means "a fresh singleton community".
    /// The result is renormalized (dense ids, fresh tallies).
    pub fn with_move(
        &self,
        graph: &Graph,
        v: u32,
        target: u32,
    ) -> Result<Partition, PartitionError> {
        if target as usize > self.community_count {
            return Err(PartitionError::TargetOutOfRange {
                target,
                communities: self.community_count,
            });
        }
        let mut raw = self.labels.clone();
        raw[v as usize] = target;
        Partition::from_labels(graph, &raw)
    }
}

/// Recomputes `S_tot` / `W_in` from scratch. Walks edges in the graph's
/// canonical order so totals agree bit-for-bit with the graph's own
/// edge-weight tally on integer-weight graphs.
fn weight_tallies(graph: &Graph, labels: &[u32], communities: usize) -> (Vec<f64>, Vec<f64>) {
    let mut sigma_tot = vec![0.0; communities];
    let mut sigma_in = vec![0.0; communities];
    for v in 0..graph.vertex_count() as u32 {
        sigma_tot[labels[v as usize] as usize] += graph.degree(v);
    }
    for (v, row) in (0..graph.vertex_count() as u32).map(|v| (v, graph.neighbors(v))) {
        for &(u, w) in row {
            if u >= v && labels[u as usize] == labels[v as usize] {
                sigma_in[labels[v as usize] as usize] += w;
            }
        }
    }
    (sigma_tot, sigma_in)
}

/// Community-summed modularity of `partition` on `graph`.
pub fn modularity(graph: &Graph, partition: &Partition) -> Result<f64, PartitionError> {
    if partition.labels.len() != graph.vertex_count() {
        return Err(PartitionError::SizeMismatch {
            labels: partition.labels.len(),
            vertices: graph.vertex_count(),
        });
    }
    let m_w = graph.edge_weight_total();
    let mut q = 0.0;
    for c in 0..partition.community_count {
        let frac = partition.sigma_tot[c] / (2.0 * m_w);
        q += partition.sigma_in[c] / m_w - frac * frac;
    }
    Ok(q)
}

/// Literal O(n^2) modularity: `(1/2m_w) sum_ij (A_ij - k_i k_j / 2 m_w)`
/// over ordered same-community pairs, with `A_ii` twice the stored
/// self-loop weight. Test oracle; capped at 2000 vertices.
pub fn pairwise_modularity_oracle(
    graph: &Graph,
    partition: &Partition,
) -> Result<f64, PartitionError> {
    let n = graph.vertex_count();
    if n > 2000 {
        return Err(PartitionError::OracleTooLarge(n));
    }
    if partition.labels.len() != n {
        return Err(PartitionError::SizeMismatch {
            labels: partition.labels.len(),
            vertices: n,
        });
    }
    let two_m = graph.total_weight();
    let mut row = vec![0.0f64; n];
    let mut acc = 0.0;
    for i in 0..n as u32 {
        for &(j, w) in graph.neighbors(i) {
            row[j as usize] += w;
            if j == i {
                row[j as usize] += w; // A_ii carries the loop twice
            }
        }
        for j in 0..n as u32 {
            if partition.labels[i as usize] == partition.labels[j as usize] {
                acc += row[j as usize] - graph.degree(i) * graph.degree(j) / two_m;
            }
        }
        for &(j, _) in graph.neighbors(i) {
            row[j as usize] = 0.0;
        }
    }
    Ok(acc / two_m)
}

/// Configuration for random cut-set starting partitions.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct CutSeedConfig {
    /// Probability that an edge lands in the cut set.
    pub p_cut: f64,
    pub rng_seed: u64,
}

impl Default for CutSeedConfig {
    fn default() -> Self {
        CutSeedConfig {
            p_cut: 0.5,
            rng_seed: 0,
        }
    }
}

/// Draws a random starting partition: each edge joins the cut set by an
/// independent Bernoulli(`p_cut`) trial, and communities are the connected
/// components after cut edges are removed. Deterministic in `rng_seed`;
/// edges are visited in canonical order.
pub fn random_cut_partition(graph: &Graph, cfg: &CutSeedConfig) -> Partition {
    let n = graph.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut parent: Vec<u32> = (0..n as u32).collect();

    fn find(parent: &mut [u32], mut v: u32) -> u32 {
        while parent[v as usize] != v {
            parent[v as usize] = parent[parent[v as usize] as usize];
            v = parent[v as usize];
        }
        v
    }

    for (a, b, _) in graph.edges() {
        let cut = rng.gen::<f64>() < cfg.p_cut;
        if !cut && a != b {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                // Union by smaller root keeps roots canonical.
                let (lo, hi) = (ra.min(rb), ra.max(rb));
                parent[hi as usize] = lo;
            }
        }
    }
    let labels: Vec<u32> = (0..n as u32).map(|v| find(&mut parent, v)).collect();
    Partition::from_labels(graph, &labels).expect("labels cover the graph")
}

/// Collapses each community to a single vertex. Inter-community weights are
/// summed; each community's internal weight becomes a self-loop, so
/// modularity of the quotient under singletons equals modularity of `graph`
/// under `partition`. Quotient vertices are named by community id.
pub fn quotient_graph(graph: &Graph, partition: &Partition) -> Graph {
    let c = partition.community_count();
    let mut weights: std::collections::HashMap<(u32, u32), f64> = std::collections::HashMap::new();
    for (a, b, w) in graph.edges() {
        let (ca, cb) = (partition.community_of(a), partition.community_of(b));
        let key = (ca.min(cb), ca.max(cb));
        *weights.entry(key).or_insert(0.0) += w;
    }
    let ids: Vec<String> = (0..c).map(|i| i.to_string()).collect();
    Graph::from_weighted_edges(ids, weights.into_iter().map(|((a, b), w)| (a, b, w)))
        .expect("quotient of a non-empty graph is non-empty")
}

/// Writes `original_id<TAB>community_id`, one vertex per line.
pub fn write_partition(
    graph: &Graph,
    partition: &Partition,
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    for v in 0..graph.vertex_count() as u32 {
        writeln!(out, "{}\t{}", graph.original_id(v), partition.community_of(v))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;

    fn graph(text: &str) -> Graph {
        parse_edge_list(text.as_bytes(), "<test>").unwrap().0
    }

    fn two_triangles() -> Graph {
        graph("a b\nb c\nc a\nd e\ne f\nf d\n")
    }

    #[test]
    fn labels_are_densified_by_smallest_member() {
        let g = graph("a b\nb c\nc d\n");
        let p = Partition::from_labels(&g, &[7, 7, 2, 9]).unwrap();
        assert_eq!(p.labels(), &[0, 0, 1, 2]);
        assert_eq!(p.community_count(), 3);
    }

    #[test]
    fn all_in_one_has_zero_modularity_exactly() {
        for text in ["a b\nb c\nc a\n", "a b\nb c\nc d\nd a\na c 2\n", "x y 3.5\n"] {
            let g = graph(text);
            let p = Partition::all_in_one(&g);
            assert_eq!(modularity(&g, &p).unwrap(), 0.0, "graph {text:?}");
        }
    }

    #[test]
    fn two_triangles_split_scores_half() {
        let g = two_triangles();
        let p = Partition::from_labels(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        assert_eq!(modularity(&g, &p).unwrap(), 0.5);
    }

    #[test]
    fn triangle_singletons_score_minus_third() {
        let g = graph("a b\nb c\nc a\n");
        let p = Partition::singletons(&g);
        let q = modularity(&g, &p).unwrap();
        assert!((q - (-1.0 / 3.0)).abs() < 1e-15, "q = {q}");
    }

    #[test]
    fn oracle_matches_summed_form_on_fixtures() {
        let g = two_triangles();
        for labels in [
            vec![0, 0, 0, 1, 1, 1],
            vec![0, 0, 0, 0, 0, 0],
            vec![0, 1, 2, 3, 4, 5],
            vec![0, 1, 0, 1, 0, 1],
        ] {
            let p = Partition::from_labels(&g, &labels).unwrap();
            let q = modularity(&g, &p).unwrap();
            let oracle = pairwise_modularity_oracle(&g, &p).unwrap();
            assert!((q - oracle).abs() < 1e-12, "{labels:?}: {q} vs {oracle}");
        }
    }

    #[test]
    fn oracle_handles_self_loops() {
        let g = Graph::from_weighted_edges(
            vec!["0".into(), "1".into()],
            vec![(0, 1, 2.0), (0, 0, 3.0), (1, 1, 1.0)],
        )
        .unwrap();
        for labels in [vec![0, 0], vec![0, 1]] {
            let p = Partition::from_labels(&g, &labels).unwrap();
            let q = modularity(&g, &p).unwrap();
            let oracle = pairwise_modularity_oracle(&g, &p).unwrap();
            assert!((q - oracle).abs() < 1e-12, "{labels:?}: {q} vs {oracle}");
        }
    }

    #[test]
    fn size_mismatch_is_reported() {
        let g = two_triangles();
        assert!(matches!(
            Partition::from_labels(&g, &[0, 0, 0]),
            Err(PartitionError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn with_move_updates_tallies_consistently() {
        let g = two_triangles();
        let p = Partition::from_labels(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        let moved = p.with_move(&g, 3, 0).unwrap();
        let rebuilt = Partition::from_labels(&g, moved.labels()).unwrap();
        assert_eq!(moved, rebuilt);
        // Fresh singleton target.
        let iso = p.with_move(&g, 0, p.community_count() as u32).unwrap();
        assert_eq!(iso.community_count(), 3);
    }

    #[test]
    fn cut_partition_extremes() {
        let g = two_triangles();
        // p_cut = 0: nothing cut, communities are the graph's components.
        let p0 = random_cut_partition(&g, &CutSeedConfig { p_cut: 0.0, rng_seed: 5 });
        assert_eq!(p0.community_count(), 2);
        // p_cut = 1: everything cut, all singletons.
        let p1 = random_cut_partition(&g, &CutSeedConfig { p_cut: 1.0, rng_seed: 5 });
        assert_eq!(p1.community_count(), 6);
    }

    #[test]
    fn cut_partition_is_deterministic_per_seed() {
        let g = two_triangles();
        for seed in 0..20 {
            let cfg = CutSeedConfig { p_cut: 0.5, rng_seed: seed };
            assert_eq!(random_cut_partition(&g, &cfg), random_cut_partition(&g, &cfg));
        }
    }

    #[test]
    fn cut_partition_outcomes_are_roughly_uniform_on_path() {
        // Path a-b-c with p_cut = 1/2 has four equally likely outcomes.
        let g = graph("a b\nb c\n");
        let mut counts = [0usize; 4];
        let trials = 10_000;
        for seed in 0..trials {
            let p = random_cut_partition(&g, &CutSeedConfig { p_cut: 0.5, rng_seed: seed });
            let key = match (p.community_of(0) == p.community_of(1), p.community_of(1) == p.community_of(2)) {
                (false, false) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (true, true) => 3,
            };
            counts[key] += 1;
        }
        let expected = trials as f64 / 4.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 99th percentile of chi-squared with 3 degrees of freedom.
        assert!(chi2 < 11.345, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn quotient_preserves_modularity() {
        let g = two_triangles();
        for labels in [vec![0, 0, 0, 1, 1, 1], vec![0, 0, 1, 1, 2, 2], vec![0; 6]] {
            let p = Partition::from_labels(&g, &labels).unwrap();
            let quot = quotient_graph(&g, &p);
            let singles = Partition::singletons(&quot);
            let q_orig = modularity(&g, &p).unwrap();
            let q_quot = modularity(&quot, &singles).unwrap();
            assert!((q_orig - q_quot).abs() < 1e-12, "{labels:?}");
        }
    }

    #[test]
    fn partition_text_format() {
        let g = graph("a b\nb c\n");
        let p = Partition::from_labels(&g, &[0, 0, 1]).unwrap();
        let mut buf = Vec::new();
        write_partition(&g, &p, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a\t0\nb\t0\nc\t1\n");
    }
}
