//! Shared helpers for the acceptance suite: independent oracles and random
//! fixtures. Everything here is deliberately naive — dense matrices, literal
//! double sums, exhaustive enumeration — so it cannot share a bug with the
//! engine implementations it checks.

use modquery::graph::Graph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Erdős–Rényi-style random graph with string ids `v0..v{n-1}`. Guaranteed
/// to have at least one edge (a path edge is forced when the dice produce
/// none), unit weights, no self-loops, no duplicates.
pub fn er_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    assert!(n >= 2);
    let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    for a in 0..n as u32 {
        for b in (a + 1)..n as u32 {
            if rng.gen::<f64>() < p {
                edges.push((a, b, 1.0));
            }
        }
    }
    if edges.is_empty() {
        let a = rng.gen_range(0..n as u32 - 1);
        edges.push((a, a + 1, 1.0));
    }
    Graph::from_weighted_edges(ids, edges).expect("random graph construction")
}

/// Literal dense double-sum modularity:
/// `Q = (1/2m) * sum_{ij, c_i == c_j} (A_ij - k_i * k_j / 2m)`,
/// over ordered pairs including the diagonal. Independent of the library's
/// own pairwise oracle (dense matrix here, adjacency walk there).
pub fn dense_modularity(graph: &Graph, labels: &[u32]) -> f64 {
    let n = graph.vertex_count();
    assert_eq!(labels.len(), n);
    let mut a = vec![vec![0.0f64; n]; n];
    for (u, v, w) in graph.edges() {
        a[u as usize][v as usize] += w;
        a[v as usize][u as usize] += w;
    }
    let k: Vec<f64> = (0..n as u32).map(|v| graph.degree(v)).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// All set partitions of `{0..n}` as restricted-growth label strings
/// (labels[0] = 0; labels[i] <= 1 + max(labels[..i])). Bell(10) = 115975,
/// so keep n small.
pub fn all_partitions(n: usize) -> Vec<Vec<u32>> {
    assert!(n >= 1 && n <= 10);
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(cur: &mut Vec<u32>, i: usize, max_used: u32, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for label in 0..=max_used + 1 {
            cur[i] = label;
            rec(cur, i + 1, max_used.max(label), out);
        }
    }
    if n == 1 {
        return vec![vec![0]];
    }
    // Fix labels[0] = 0, recurse over the rest.
    rec(&mut cur, 1, 0, &mut out);
    out
}

/// Best modularity over every partition of the graph's vertices, found by
/// exhaustive enumeration with the dense oracle.
pub fn brute_force_best_q(graph: &Graph) -> f64 {
    let n = graph.vertex_count();
    all_partitions(n)
        .iter()
        .map(|labels| dense_modularity(graph, labels))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Spearman rank correlation with midranks for ties.
pub fn spearman_midrank(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = midranks(xs);
    let ry = midranks(ys);
    pearson(&rx, &ry)
}

fn midranks(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && vals[order[j + 1]] == vals[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average 1-based rank.
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mid;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

pub fn mean(vals: &[f64]) -> f64 {
    vals.iter().sum::<f64>() / vals.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_std(vals: &[f64]) -> f64 {
    let m = mean(vals);
    (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (vals.len() - 1) as f64).sqrt()
}

/// Pair-counting AUC oracle: fraction of (positive, negative) pairs where
/// the positive outscores the negative, ties worth one half. O(|P|·|N|),
/// counted in doubled integers.
pub fn pair_count_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut twice: u64 = 0;
    for &p in pos {
        for &q in neg {
            if p > q {
                twice += 2;
            } else if p == q {
                twice += 1;
            }
        }
    }
    twice as f64 / (2 * pos.len() * neg.len()) as f64
}
