//! Planted-community benchmark graphs in the LFR style: power-law degree
//! and community-size distributions, a tunable mixing fraction of
//! inter-community edges, and optional overlapping memberships.
//!
//! Construction pipeline: sample a degree sequence from a truncated power
//! law whose lower cutoff is solved to hit the requested mean; sample
//! community sizes until they cover all memberships; place memberships
//! with a capacity-respecting kick-out loop; split each vertex's degree
//! into internal stubs (per community) and external stubs; wire both
//! kinds with a configuration-model matching that rejects self-loops and
//! duplicates, repairing leftovers by edge swaps. The result is a simple
//! graph, its ground-truth labels, and the realized mixing fraction.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Community, Graph, LabelSet};

/// Re-pair rounds before leftover stubs go to edge-swap repair.
const PAIR_ROUNDS: usize = 20;
/// Rounds (of the above) in which external pairs also avoid landing
/// inside a shared community; afterwards only hard conflicts reject.
const SOFT_ROUNDS: usize = 10;
/// Random partner draws before a leftover pair is dropped.
const SWAP_TRIES: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum LfrError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("wiring failed: {0}")]
    WiringFailure(String),
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct LfrConfig {
    pub n: usize,
    /// Target mean degree; the power-law lower cutoff is solved for this.
    pub avg_degree: f64,
    pub max_degree: usize,
    /// Degree power-law exponent (density ~ k^-tau).
    pub tau_degree: f64,
    /// Community-size power-law exponent.
    pub tau_community: f64,
    pub min_community: usize,
    pub max_community: usize,
    /// Fraction of each vertex's edges that leave its communities.
    pub mixing: f64,
    /// Fraction of vertices holding more than one membership.
    pub overlap_fraction: f64,
    /// Overlapping vertices get 2..=this many memberships.
    pub memberships_per_overlap: usize,
    pub rng_seed: u64,
}

impl Default for LfrConfig {
    fn default() -> LfrConfig {
        LfrConfig {
            n: 1000,
            avg_degree: 20.0,
            max_degree: 50,
            tau_degree: 2.0,
            tau_community: 1.0,
            min_community: 10,
            max_community: 100,
            mixing: 0.3,
            overlap_fraction: 0.0,
            memberships_per_overlap: 4,
            rng_seed: 0,
        }
    }
}

/// What the wiring phase had to do beyond clean stub matching.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct WiringReport {
    /// Internal stubs abandoned after repair gave up (degree shortfall).
    pub internal_stubs_dropped: usize,
    /// External stubs abandoned, including one for an odd stub total.
    pub external_stubs_dropped: usize,
    /// Leftover pairs resolved by swapping with an accepted edge.
    pub edge_swaps: usize,
    /// Members displaced during community assignment.
    pub kickouts: usize,
}

pub struct SyntheticNetwork {
    pub graph: Graph,
    pub truth: LabelSet,
    /// Measured fraction of edge endpoints whose opposite endpoint shares
    /// no community.
    pub realized_mixing: f64,
    pub diagnostics: WiringReport,
}

/// `∫ x^(p - tau) dx` over `[a, b]`, with the log special case when the
/// integrand's exponent cancels. Ratios of these give moments of the
/// truncated power law.
fn powerlaw_segment(tau: f64, a: f64, b: f64, p: f64) -> f64 {
    let e = p - tau + 1.0;
    if e.abs() < 1e-9 {
        (b / a).ln()
    } else {
        (b.powf(e) - a.powf(e)) / e
    }
}

/// Mean of the continuous truncated power law `x^-tau` on `[a, b]`.
fn powerlaw_mean(tau: f64, a: f64, b: f64) -> f64 {
    powerlaw_segment(tau, a, b, 1.0) / powerlaw_segment(tau, a, b, 0.0)
}

/// Inverse-CDF draw from the truncated power law, `u` uniform in [0, 1).
fn powerlaw_sample(tau: f64, a: f64, b: f64, u: f64) -> f64 {
    let e = 1.0 - tau;
    if e.abs() < 1e-9 {
        a * (b / a).powf(u)
    } else {
        (a.powf(e) + u * (b.powf(e) - a.powf(e))).powf(1.0 / e)
    }
}

fn validate(cfg: &LfrConfig) -> Result<(), LfrError> {
    let bad = |msg: String| Err(LfrError::BadConfig(msg));
    if cfg.n == 0 {
        return bad("n must be positive".to_string());
    }
    if !(0.0..=1.0).contains(&cfg.mixing) {
        return bad(format!("mixing must lie in [0, 1], got {}", cfg.mixing));
    }
    if !(0.0..=1.0).contains(&cfg.overlap_fraction) {
        return bad(format!(
            "overlap_fraction must lie in [0, 1], got {}",
            cfg.overlap_fraction
        ));
    }
    if cfg.min_community < 3 {
        return bad(format!(
            "min_community must be at least 3, got {}",
            cfg.min_community
        ));
    }
    if cfg.min_community > cfg.max_community {
        return bad(format!(
            "min_community {} exceeds max_community {}",
            cfg.min_community, cfg.max_community
        ));
    }
    if !(2..=4).contains(&cfg.memberships_per_overlap) {
        return bad(format!(
            "memberships_per_overlap must lie in [2, 4], got {}",
            cfg.memberships_per_overlap
        ));
    }
    if cfg.max_degree == 0 || cfg.max_degree >= cfg.n {
        return bad(format!(
            "max_degree must lie in [1, n), got {} with n = {}",
            cfg.max_degree, cfg.n
        ));
    }
    if !(cfg.avg_degree > 0.0) || !(cfg.tau_degree > 0.0) || !(cfg.tau_community > 0.0) {
        return bad("avg_degree and power-law exponents must be positive".to_string());
    }
    Ok(())
}

/// Degree sequence: solve the power-law lower cutoff for the requested
/// mean by bisection (the truncated mean is monotone in the cutoff),
/// then draw `n` rounded samples.
fn sample_degrees(cfg: &LfrConfig, rng: &mut ChaCha8Rng) -> Result<Vec<usize>, LfrError> {
    let b = cfg.max_degree as f64;
    if cfg.avg_degree >= b {
        return Err(LfrError::Infeasible(format!(
            "avg_degree {} must be below max_degree {}",
            cfg.avg_degree, cfg.max_degree
        )));
    }
    let floor_mean = powerlaw_mean(cfg.tau_degree, 1.0, b);
    if floor_mean > cfg.avg_degree {
        return Err(LfrError::Infeasible(format!(
            "avg_degree {} is below {:.2}, the minimum reachable with max_degree {}",
            cfg.avg_degree, floor_mean, cfg.max_degree
        )));
    }
    let (mut lo, mut hi) = (1.0, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if powerlaw_mean(cfg.tau_degree, mid, b) < cfg.avg_degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    Ok((0..cfg.n)
        .map(|_| {
            let x = powerlaw_sample(cfg.tau_degree, a, b, rng.gen::<f64>());
            (x.round() as usize).clamp(1, cfg.max_degree)
        })
        .collect())
}

/// Membership count per vertex: overlapping vertices (a random subset of
/// the requested fraction) get 2..=memberships_per_overlap communities.
fn sample_membership_counts(cfg: &LfrConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut counts = vec![1usize; cfg.n];
    let n_overlap = (cfg.overlap_fraction * cfg.n as f64).round() as usize;
    let mut order: Vec<usize> = (0..cfg.n).collect();
    order.shuffle(rng);
    for &v in order.iter().take(n_overlap) {
        counts[v] = rng.gen_range(2..=cfg.memberships_per_overlap);
    }
    counts
}

/// Community sizes drawn from the size power law until they cover
/// `total_memberships`, then shaved/regrown so the sum is exact while
/// every size stays within bounds.
fn community_sizes(
    cfg: &LfrConfig,
    total_memberships: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>, LfrError> {
    if total_memberships < cfg.min_community {
        return Err(LfrError::Infeasible(format!(
            "{} total memberships cannot fill a community of at least {}",
            total_memberships, cfg.min_community
        )));
    }
    let (a, b) = (cfg.min_community as f64, cfg.max_community as f64);
    let mut sizes: Vec<usize> = Vec::new();
    let mut sum = 0usize;
    while sum < total_memberships {
        let s = (powerlaw_sample(cfg.tau_community, a, b, rng.gen::<f64>()).round() as usize)
            .clamp(cfg.min_community, cfg.max_community);
        sizes.push(s);
        sum += s;
    }
    let mut excess = sum - total_memberships;
    while excess > 0 {
        // Shave the current largest community down toward the minimum.
        let (i, &largest) = sizes
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(&x.0)))
            .expect("at least one community");
        if largest > cfg.min_community {
            let cut = excess.min(largest - cfg.min_community);
            sizes[i] -= cut;
            excess -= cut;
        } else {
            // Everything is at the minimum: drop one community and grow
            // the rest back if that overshot.
            if sizes.len() == 1 {
                return Err(LfrError::Infeasible(format!(
                    "cannot fit {} memberships into communities of {}..={}",
                    total_memberships, cfg.min_community, cfg.max_community
                )));
            }
            sizes.pop();
            if excess >= cfg.min_community {
                excess -= cfg.min_community;
            } else {
                let mut need = cfg.min_community - excess;
                excess = 0;
                for s in sizes.iter_mut() {
                    let add = need.min(cfg.max_community - *s);
                    *s += add;
                    need -= add;
                    if need == 0 {
                        break;
                    }
                }
                if need > 0 {
                    return Err(LfrError::Infeasible(format!(
                        "cannot fit {} memberships into communities of {}..={}",
                        total_memberships, cfg.min_community, cfg.max_community
                    )));
                }
            }
        }
    }
    Ok(sizes)
}

/// Assigns every membership token to a community that can host the
/// vertex's internal degree share, kicking a random incumbent when a
/// community overfills (the displaced token re-queues). Capacities sum
/// to the token count, so success fills every community exactly.
fn assign_memberships(
    sizes: &[usize],
    mem_counts: &[usize],
    need: &[usize],
    rng: &mut ChaCha8Rng,
    kickouts: &mut usize,
) -> Result<(Vec<Vec<u32>>, Vec<Vec<u32>>), LfrError> {
    let n = mem_counts.len();
    let q = sizes.len();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); q];
    let mut memberships: Vec<Vec<u32>> = vec![Vec::new(); n];

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut queue: VecDeque<u32> = VecDeque::new();
    for &v in &order {
        for _ in 0..mem_counts[v as usize] {
            queue.push_back(v);
        }
    }
    let total_tokens = queue.len();
    let budget = 200 * total_tokens + 10_000;
    let mut processed = 0usize;
    while let Some(v) = queue.pop_front() {
        processed += 1;
        if processed > budget {
            return Err(LfrError::WiringFailure(format!(
                "community assignment did not settle after {processed} placements"
            )));
        }
        let candidates: Vec<u32> = (0..q as u32)
            .filter(|&c| {
                sizes[c as usize] > need[v as usize] && !memberships[v as usize].contains(&c)
            })
            .collect();
        let Some(&c) = candidates.as_slice().choose(rng) else {
            return Err(LfrError::Infeasible(format!(
                "vertex with internal degree share {} fits no available community",
                need[v as usize]
            )));
        };
        memberships[v as usize].push(c);
        members[c as usize].push(v);
        if members[c as usize].len() > sizes[c as usize] {
            // Overfull: displace a random incumbent (the newcomer sits
            // at the end and is never picked).
            let idx = rng.gen_range(0..members[c as usize].len() - 1);
            let kicked = members[c as usize].swap_remove(idx);
            memberships[kicked as usize].retain(|&x| x != c);
            queue.push_back(kicked);
            *kickouts += 1;
        }
    }
    for m in &mut memberships {
        m.sort_unstable();
    }
    Ok((members, memberships))
}

fn edge_key(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

fn share_any_community(memberships: &[Vec<u32>], a: u32, b: u32) -> bool {
    memberships[a as usize]
        .iter()
        .any(|c| memberships[b as usize].contains(c))
}

/// Resolves one leftover bad pair `(u, v)` by splitting an accepted edge
/// `(x, y)` from the same wiring phase into `(u, x)` and `(v, y)`.
fn try_swap_repair(
    u: u32,
    v: u32,
    edges: &mut Vec<(u32, u32)>,
    edge_set: &mut HashSet<(u32, u32)>,
    phase_start: usize,
    rng: &mut ChaCha8Rng,
    swaps: &mut usize,
) -> bool {
    if edges.len() <= phase_start {
        return false;
    }
    for _ in 0..SWAP_TRIES {
        let idx = rng.gen_range(phase_start..edges.len());
        let (x, y) = edges[idx];
        for (p, q) in [(x, y), (y, x)] {
            if u == p || v == q {
                continue;
            }
            let e1 = edge_key(u, p);
            let e2 = edge_key(v, q);
            if e1 == e2 || edge_set.contains(&e1) || edge_set.contains(&e2) {
                continue;
            }
            edge_set.remove(&edge_key(x, y));
            edges[idx] = e1;
            edges.push(e2);
            edge_set.insert(e1);
            edge_set.insert(e2);
            *swaps += 1;
            return true;
        }
    }
    false
}

/// Configuration-model matching: shuffle the stub pool and pair
/// consecutive entries, re-pooling self-loops and duplicates for another
/// round. When `memberships` is given (external phase), early rounds also
/// re-pool pairs that land inside a shared community. Whatever survives
/// the rounds goes to edge-swap repair, then is dropped and counted.
fn pair_stubs(
    pool: &mut Vec<u32>,
    memberships: Option<&[Vec<u32>]>,
    edges: &mut Vec<(u32, u32)>,
    edge_set: &mut HashSet<(u32, u32)>,
    phase_start: usize,
    rng: &mut ChaCha8Rng,
    dropped: &mut usize,
    swaps: &mut usize,
) {
    for round in 0..PAIR_ROUNDS {
        if pool.len() < 2 {
            break;
        }
        pool.shuffle(rng);
        let soft = round < SOFT_ROUNDS;
        let mut retry = Vec::new();
        for pair in pool.chunks(2) {
            if pair.len() < 2 {
                retry.push(pair[0]);
                continue;
            }
            let (a, b) = (pair[0], pair[1]);
            let key = edge_key(a, b);
            let conflict = a == b
                || edge_set.contains(&key)
                || (soft && memberships.is_some_and(|m| share_any_community(m, a, b)));
            if conflict {
                retry.push(a);
                retry.push(b);
            } else {
                edge_set.insert(key);
                edges.push(key);
            }
        }
        *pool = retry;
    }
    let leftovers = std::mem::take(pool);
    for pair in leftovers.chunks(2) {
        if pair.len() < 2 {
            *dropped += 1;
            continue;
        }
        if !try_swap_repair(pair[0], pair[1], edges, edge_set, phase_start, rng, swaps) {
            *dropped += 2;
        }
    }
}

/// Fraction of edge endpoints whose opposite endpoint shares no community.
/// Overlapping labels count as internal if any community is shared.
pub fn measure_mixing(graph: &Graph, truth: &LabelSet) -> f64 {
    let memberships = truth.memberships(graph.vertex_count());
    let mut external = 0usize;
    let mut total = 0usize;
    for (a, b, _) in graph.edges() {
        if a == b {
            continue;
        }
        total += 2;
        if !share_any_community(&memberships, a, b) {
            external += 2;
        }
    }
    if total == 0 {
        0.0
    } else {
        external as f64 / total as f64
    }
}

pub fn generate(cfg: &LfrConfig) -> Result<SyntheticNetwork, LfrError> {
    validate(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut report = WiringReport::default();

    let degrees = sample_degrees(cfg, &mut rng)?;
    let mem_counts = sample_membership_counts(cfg, &mut rng);
    let internal: Vec<usize> = degrees
        .iter()
        .map(|&k| ((1.0 - cfg.mixing) * k as f64).round() as usize)
        .collect();
    // Worst-case per-community share: the equal split plus the whole
    // remainder (which lands on a single community).
    let need: Vec<usize> = (0..cfg.n)
        .map(|v| internal[v] / mem_counts[v] + internal[v] % mem_counts[v])
        .collect();

    let total_memberships: usize = mem_counts.iter().sum();
    let sizes = community_sizes(cfg, total_memberships, &mut rng)?;
    let max_size = *sizes.iter().max().expect("at least one community");
    if let Some(v) = (0..cfg.n).find(|&v| need[v] >= max_size) {
        return Err(LfrError::Infeasible(format!(
            "internal degree share {} needs a community larger than {}",
            need[v], max_size
        )));
    }
    if mem_counts.iter().any(|&m| m > sizes.len()) {
        return Err(LfrError::Infeasible(format!(
            "{} distinct memberships requested but only {} communities drawn",
            mem_counts.iter().max().unwrap(),
            sizes.len()
        )));
    }

    let (members, memberships) =
        assign_memberships(&sizes, &mem_counts, &need, &mut rng, &mut report.kickouts)?;

    // Split each vertex's internal quota evenly over its communities,
    // remainder to its largest community (ties to the lowest id).
    let q = sizes.len();
    let mut comm_shares: Vec<Vec<(u32, usize)>> = vec![Vec::new(); q];
    let mut external_quota: Vec<usize> = (0..cfg.n).map(|v| degrees[v] - internal[v]).collect();
    for v in 0..cfg.n {
        let m = mem_counts[v];
        let base = internal[v] / m;
        let rem = internal[v] % m;
        let target = memberships[v]
            .iter()
            .copied()
            .max_by(|&x, &y| {
                sizes[x as usize]
                    .cmp(&sizes[y as usize])
                    .then(y.cmp(&x))
            })
            .expect("every vertex has a membership");
        for &c in &memberships[v] {
            let share = base + if c == target { rem } else { 0 };
            comm_shares[c as usize].push((v as u32, share));
        }
    }
    // Stub parity: an odd internal total moves one stub of the
    // largest-share member to its external quota. At mixing zero the stub
    // is dropped instead — exporting it would manufacture the only
    // cross-community edge in an otherwise pure network.
    for shares in &mut comm_shares {
        let total: usize = shares.iter().map(|&(_, s)| s).sum();
        if total % 2 == 1 {
            let (_, entry) = shares
                .iter_mut()
                .map(|e| (e.1, e))
                .max_by(|x, y| x.0.cmp(&y.0).then(y.1 .0.cmp(&x.1 .0)))
                .expect("odd total implies a positive share");
            entry.1 -= 1;
            if cfg.mixing == 0.0 {
                report.internal_stubs_dropped += 1;
            } else {
                external_quota[entry.0 as usize] += 1;
            }
        }
    }
    let total_external: usize = external_quota.iter().sum();
    if total_external % 2 == 1 {
        // One surplus stub: retire it from the heaviest external quota.
        let v = (0..cfg.n)
            .max_by(|&x, &y| external_quota[x].cmp(&external_quota[y]).then(y.cmp(&x)))
            .expect("n > 0");
        external_quota[v] -= 1;
        report.external_stubs_dropped += 1;
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut edge_set: HashSet<(u32, u32)> = HashSet::new();
    for shares in &comm_shares {
        let mut pool: Vec<u32> = Vec::new();
        for &(v, s) in shares {
            pool.extend(std::iter::repeat(v).take(s));
        }
        let phase_start = edges.len();
        pair_stubs(
            &mut pool,
            None,
            &mut edges,
            &mut edge_set,
            phase_start,
            &mut rng,
            &mut report.internal_stubs_dropped,
            &mut report.edge_swaps,
        );
    }
    let mut pool: Vec<u32> = Vec::new();
    for (v, &s) in external_quota.iter().enumerate() {
        pool.extend(std::iter::repeat(v as u32).take(s));
    }
    let phase_start = edges.len();
    pair_stubs(
        &mut pool,
        Some(&memberships),
        &mut edges,
        &mut edge_set,
        phase_start,
        &mut rng,
        &mut report.external_stubs_dropped,
        &mut report.edge_swaps,
    );

    let ids: Vec<String> = (0..cfg.n).map(|v| v.to_string()).collect();
    let weighted: Vec<(u32, u32, f64)> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    let graph = Graph::from_weighted_edges(ids, weighted)
        .map_err(|e| LfrError::WiringFailure(format!("assembled graph rejected: {e}")))?;
    let graph = if graph.is_connected() {
        graph
    } else {
        graph.largest_connected_component()
    };

    // Carry the ground truth over to the surviving component.
    let mut communities = Vec::new();
    for (c, mem) in members.iter().enumerate() {
        let mut kept: Vec<u32> = mem
            .iter()
            .filter_map(|&v| graph.resolve_id(&v.to_string()))
            .collect();
        kept.sort_unstable();
        if !kept.is_empty() {
            communities.push(Community {
                label: format!("c{c}"),
                members: kept,
            });
        }
    }
    let truth = LabelSet { communities };
    let realized_mixing = measure_mixing(&graph, &truth);
    Ok(SyntheticNetwork {
        graph,
        truth,
        realized_mixing,
        diagnostics: report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_powerlaw_math() {
        // tau = 2 hits the logarithmic special case of the mean.
        let m = powerlaw_mean(2.0, 10.0, 50.0);
        let want = (10.0 * 50.0 / 40.0) * (50.0f64 / 10.0).ln();
        assert!((m - want).abs() < 1e-9);
        // Degenerate interval always returns the point mass.
        assert_eq!(powerlaw_sample(1.0, 30.0, 30.0, 0.37), 30.0);
        // Samples stay inside the interval at the extremes of u.
        // Raw samples stay inside the interval up to float round-off
        // (callers round and clamp anyway).
        for tau in [1.0, 2.0, 2.5] {
            for u in [0.0, 0.5, 0.999_999] {
                let x = powerlaw_sample(tau, 5.0, 40.0, u);
                assert!(
                    (5.0 - 1e-9..=40.0 + 1e-9).contains(&x),
                    "tau {tau} u {u} gave {x}"
                );
            }
        }
    }

    #[test]
    fn mixing_zero_produces_pure_blocks() {
        let cfg = LfrConfig {
            n: 60,
            avg_degree: 8.0,
            max_degree: 12,
            min_community: 30,
            max_community: 30,
            mixing: 0.0,
            rng_seed: 7,
            ..LfrConfig::default()
        };
        let net = generate(&cfg).unwrap();
        // No external stubs at all: the components are the communities
        // and the measured mixing is exactly zero.
        assert_eq!(net.realized_mixing, 0.0);
        assert!(net.graph.vertex_count() <= 30);
        for c in &net.truth.communities {
            assert!(c.members.iter().all(|&v| (v as usize) < net.graph.vertex_count()));
        }
    }

    #[test]
    fn default_scale_hits_degree_and_mixing_targets() {
        let cfg = LfrConfig {
            rng_seed: 1,
            ..LfrConfig::default()
        };
        let net = generate(&cfg).unwrap();
        let g = &net.graph;
        // The mixing-0.3 giant component should swallow nearly everything.
        assert!(g.vertex_count() >= 990, "LCC kept {}", g.vertex_count());
        let mean_degree = 2.0 * g.edge_count() as f64 / g.vertex_count() as f64;
        assert!(
            (mean_degree - cfg.avg_degree).abs() <= 0.1 * cfg.avg_degree,
            "mean degree {mean_degree}"
        );
        let max_degree = (0..g.vertex_count() as u32)
            .map(|v| g.neighbors(v).len())
            .max()
            .unwrap();
        assert!(max_degree <= cfg.max_degree);
        assert!(
            (net.realized_mixing - cfg.mixing).abs() <= 0.05,
            "realized mixing {}",
            net.realized_mixing
        );
        for c in &net.truth.communities {
            assert!(c.members.len() <= cfg.max_community);
            assert!(c.members.len() >= cfg.min_community);
        }
        // Simple graph: unit weights only, no self-loops survived wiring.
        for (a, b, w) in g.edges() {
            assert_ne!(a, b);
            assert_eq!(w, 1.0);
        }
    }

    #[test]
    fn high_mixing_still_tracks_target() {
        let cfg = LfrConfig {
            mixing: 0.85,
            rng_seed: 5,
            ..LfrConfig::default()
        };
        let net = generate(&cfg).unwrap();
        assert!(
            (net.realized_mixing - 0.85).abs() <= 0.05,
            "realized mixing {}",
            net.realized_mixing
        );
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let cfg = LfrConfig {
            n: 300,
            rng_seed: 11,
            ..LfrConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.graph.fingerprint(), b.graph.fingerprint());
        assert_eq!(a.truth.communities.len(), b.truth.communities.len());
        for (x, y) in a.truth.communities.iter().zip(&b.truth.communities) {
            assert_eq!(x.label, y.label);
            assert_eq!(x.members, y.members);
        }
        let c = generate(&LfrConfig {
            rng_seed: 12,
            ..cfg
        })
        .unwrap();
        assert_ne!(a.graph.fingerprint(), c.graph.fingerprint());
    }

    #[test]
    fn full_overlap_gives_every_vertex_multiple_memberships() {
        let cfg = LfrConfig {
            n: 400,
            overlap_fraction: 1.0,
            rng_seed: 3,
            ..LfrConfig::default()
        };
        let net = generate(&cfg).unwrap();
        let memberships = net.truth.memberships(net.graph.vertex_count());
        assert!(memberships.iter().all(|m| m.len() >= 2));
        assert!(memberships.iter().all(|m| m.len() <= 4));
    }

    #[test]
    fn measure_mixing_edge_cases() {
        let g = Graph::from_weighted_edges(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
        )
        .unwrap();
        let all = LabelSet {
            communities: vec![Community {
                label: "all".into(),
                members: vec![0, 1, 2, 3],
            }],
        };
        assert_eq!(measure_mixing(&g, &all), 0.0);
        // Bipartition of the 4-cycle: every edge crosses.
        let split = LabelSet {
            communities: vec![
                Community {
                    label: "x".into(),
                    members: vec![0, 2],
                },
                Community {
                    label: "y".into(),
                    members: vec![1, 3],
                },
            ],
        };
        assert_eq!(measure_mixing(&g, &split), 1.0);
        // An overlapping vertex makes its edges internal.
        let overlap = LabelSet {
            communities: vec![
                Community {
                    label: "x".into(),
                    members: vec![0, 1, 2],
                },
                Community {
                    label: "y".into(),
                    members: vec![2, 3, 0],
                },
            ],
        };
        assert_eq!(measure_mixing(&g, &overlap), 0.0);
    }

    #[test]
    fn config_validation_and_feasibility() {
        let base = LfrConfig::default();
        let cases = [
            LfrConfig { mixing: 1.5, ..base },
            LfrConfig { overlap_fraction: -0.1, ..base },
            LfrConfig { min_community: 2, ..base },
            LfrConfig { memberships_per_overlap: 5, ..base },
            LfrConfig { max_degree: 1000, ..base },
            LfrConfig { min_community: 200, max_community: 100, ..base },
        ];
        for cfg in cases {
            assert!(matches!(generate(&cfg), Err(LfrError::BadConfig(_))));
        }
        // Mean degree outside what the truncated power law can reach.
        assert!(matches!(
            generate(&LfrConfig { avg_degree: 60.0, ..base }),
            Err(LfrError::Infeasible(_))
        ));
        assert!(matches!(
            generate(&LfrConfig { avg_degree: 2.0, ..base }),
            Err(LfrError::Infeasible(_))
        ));
        // Too few vertices to fill one minimum-size community.
        assert!(matches!(
            generate(&LfrConfig {
                n: 8,
                max_degree: 5,
                avg_degree: 4.0,
                ..base
            }),
            Err(LfrError::Infeasible(_))
        ));
    }
}
