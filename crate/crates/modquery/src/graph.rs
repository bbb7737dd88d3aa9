//! Undirected weighted graphs with stable vertex numbering, plus the two
//! text formats the toolkit consumes: whitespace-separated edge lists and
//! labelled community files.
//!
//! Vertices are numbered `0..n` in order of first appearance in the input;
//! the original string ids are kept in a side table so results can be
//! reported in the caller's vocabulary. Self-loops are rejected on load but
//! are permitted in internally built graphs (community aggregation stores
//! each community's internal weight as a self-loop). A self-loop of weight
//! `w` counts `w` toward internal edge weight and `2w` toward its vertex
//! degree, which is exactly what keeps modularity invariant under
//! aggregation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::hashing::Fnv1a;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("no edges after cleaning")]
    NoEdges,
    #[error("duplicate vertex id {0:?}")]
    DuplicateId(String),
    #[error("edge endpoint {0} out of range (n = {1})")]
    EndpointOutOfRange(u32, usize),
    #[error("edge weight {0} is not a positive finite number")]
    BadWeight(f64),
}

/// An undirected weighted graph. Construction normalizes everything:
/// adjacency lists are sorted by neighbor id, duplicate edges are collapsed
/// by summing weights, and degree / total-weight tallies are fixed at build
/// time.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<(u32, f64)>>,
    degrees: Vec<f64>,
    /// Sum of all vertex degrees (`2 m_w`).
    total_weight: f64,
    /// Total edge weight `m_w`, accumulated in canonical edge order
    /// (ascending vertex, then ascending neighbor, upper triangle plus
    /// loops). Partition weight tallies walk edges in the same order so the
    /// two agree exactly on integer-weight graphs.
    edge_weight: f64,
    /// Number of distinct edges, each undirected edge counted once.
    edge_count: usize,
    id_table: Vec<String>,
    id_index: HashMap<String, u32>,
}

impl Graph {
    /// Builds a graph from explicit ids and weighted edges. Duplicate edges
    /// are summed; self-loops are allowed (internal callers only — the
    /// edge-list loader screens them out first).
    pub fn from_weighted_edges(
        ids: Vec<String>,
        edges: impl IntoIterator<Item = (u32, u32, f64)>,
    ) -> Result<Graph, GraphError> {
        let n = ids.len();
        let mut id_index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if id_index.insert(id.clone(), i as u32).is_some() {
                return Err(GraphError::DuplicateId(id.clone()));
            }
        }

        // Normalize to (min, max, w), sort, and merge duplicates.
        let mut normalized: Vec<(u32, u32, f64)> = Vec::new();
        for (a, b, w) in edges {
            if a as usize >= n {
                return Err(GraphError::EndpointOutOfRange(a, n));
            }
            if b as usize >= n {
                return Err(GraphError::EndpointOutOfRange(b, n));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(GraphError::BadWeight(w));
            }
            normalized.push((a.min(b), a.max(b), w));
        }
        if normalized.is_empty() {
            return Err(GraphError::NoEdges);
        }
        normalized.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut merged: Vec<(u32, u32, f64)> = Vec::with_capacity(normalized.len());
        for (a, b, w) in normalized {
            match merged.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += w,
                _ => merged.push((a, b, w)),
            }
        }

        let mut adjacency = vec![Vec::new(); n];
        let mut degrees = vec![0.0; n];
        for &(a, b, w) in &merged {
            if a == b {
                // One stored entry; counts twice toward the degree.
                adjacency[a as usize].push((b, w));
                degrees[a as usize] += 2.0 * w;
            } else {
                adjacency[a as usize].push((b, w));
                adjacency[b as usize].push((a, w));
                degrees[a as usize] += w;
                degrees[b as usize] += w;
            }
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(u, _)| u);
        }

        // Canonical-order tallies (see field docs).
        let mut edge_weight = 0.0;
        for (v, row) in adjacency.iter().enumerate() {
            for &(u, w) in row {
                if u as usize >= v {
                    edge_weight += w;
                }
            }
        }
        let total_weight = degrees.iter().sum();

        Ok(Graph {
            adjacency,
            degrees,
            total_weight,
            edge_weight,
            edge_count: merged.len(),
            id_table: ids,
            id_index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.id_table.len()
    }

    /// Number of distinct edges (loops counted once).
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Total edge weight `m_w`; equals the edge count on unit-weight graphs.
    pub fn edge_weight_total(&self) -> f64 {
        self.edge_weight
    }

    /// Sum of all vertex degrees, `2 m_w`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Neighbors of `v`, sorted by vertex id. A self-loop appears once as
    /// `(v, w)`.
    pub fn neighbors(&self, v: u32) -> &[(u32, f64)] {
        &self.adjacency[v as usize]
    }

    /// Weighted degree of `v` (self-loops count twice).
    pub fn degree(&self, v: u32) -> f64 {
        self.degrees[v as usize]
    }

    pub fn original_id(&self, v: u32) -> &str {
        &self.id_table[v as usize]
    }

    pub fn original_ids(&self) -> &[String] {
        &self.id_table
    }

    pub fn resolve_id(&self, name: &str) -> Option<u32> {
        self.id_index.get(name).copied()
    }

    /// Walks every edge once: ascending vertex, ascending neighbor, upper
    /// triangle plus self-loops.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(v, row)| {
            row.iter()
                .filter(move |&&(u, _)| u as usize >= v)
                .map(move |&(u, w)| (v as u32, u, w))
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in self.neighbors(v) {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }

    /// Induced subgraph on the largest connected component. Ties go to the
    /// component containing the smallest vertex id. Relative vertex order is
    /// preserved, so a connected graph comes back identical.
    pub fn largest_connected_component(&self) -> Graph {
        let n = self.vertex_count();
        let mut component = vec![u32::MAX; n];
        let mut sizes: Vec<usize> = Vec::new();
        for start in 0..n as u32 {
            if component[start as usize] != u32::MAX {
                continue;
            }
            let id = sizes.len() as u32;
            let mut size = 0usize;
            let mut stack = vec![start];
            component[start as usize] = id;
            while let Some(v) = stack.pop() {
                size += 1;
                for &(u, _) in self.neighbors(v) {
                    if component[u as usize] == u32::MAX {
                        component[u as usize] = id;
                        stack.push(u);
                    }
                }
            }
            sizes.push(size);
        }
        // First maximum wins, which is the component holding the smallest
        // vertex id among the largest.
        let winner = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i as u32)
            .expect("graph has at least one vertex");

        let mut remap = vec![u32::MAX; n];
        let mut ids = Vec::with_capacity(sizes[winner as usize]);
        for v in 0..n {
            if component[v] == winner {
                remap[v] = ids.len() as u32;
                ids.push(self.id_table[v].clone());
            }
        }
        let edges: Vec<(u32, u32, f64)> = self
            .edges()
            .filter(|&(a, _, _)| component[a as usize] == winner)
            .map(|(a, b, w)| (remap[a as usize], remap[b as usize], w))
            .collect();
        Graph::from_weighted_edges(ids, edges).expect("component is non-empty")
    }

    /// Content fingerprint: vertex ids plus the canonical edge list. Stored
    /// in index files so an index can refuse to run against the wrong graph.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.vertex_count() as u64);
        h.write_u64(self.edge_count as u64);
        for id in &self.id_table {
            h.write_u64(id.len() as u64);
            h.write(id.as_bytes());
        }
        for (a, b, w) in self.edges() {
            h.write_u64(u64::from(a));
            h.write_u64(u64::from(b));
            h.write_u64(w.to_bits());
        }
        h.finish()
    }

    /// Writes the graph as an edge list that reloads to an identical graph.
    /// Edges are ordered by (larger endpoint, smaller endpoint) with the
    /// smaller endpoint printed first, which reproduces the original
    /// first-appearance numbering on reload. Weights are printed only when
    /// they differ from 1.
    pub fn write_edge_list(&self, out: &mut impl Write) -> std::io::Result<()> {
        let mut edges: Vec<(u32, u32, f64)> = self.edges().collect();
        edges.sort_by(|x, y| (x.1, x.0).cmp(&(y.1, y.0)));
        let mut buf = String::new();
        for (a, b, w) in edges {
            buf.clear();
            if w == 1.0 {
                let _ = writeln!(buf, "{} {}", self.id_table[a as usize], self.id_table[b as usize]);
            } else {
                let _ = writeln!(
                    buf,
                    "{} {} {}",
                    self.id_table[a as usize], self.id_table[b as usize], w
                );
            }
            out.write_all(buf.as_bytes())?;
        }
        Ok(())
    }
}

/// Writes a label set in the format `load_label_set` reads: one community
/// per line, label first, then the members as original vertex ids.
pub fn write_label_set(
    labels: &LabelSet,
    graph: &Graph,
    out: &mut impl Write,
) -> std::io::Result<()> {
    let mut buf = String::new();
    for c in &labels.communities {
        buf.clear();
        buf.push_str(&c.label);
        for &v in &c.members {
            buf.push(' ');
            buf.push_str(graph.original_id(v));
        }
        buf.push('\n');
        out.write_all(buf.as_bytes())?;
    }
    Ok(())
}

/// Counts of lines the edge-list loader cleaned up rather than rejected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeListReport {
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

/// Loads a whitespace-separated edge list. `#`-prefixed and blank lines are
/// skipped; each remaining line is `a b` or `a b weight`. Duplicate edges
/// are merged by summing weights; self-loop lines are dropped and counted.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Graph, EdgeListReport), GraphError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(BufReader::new(file), &path.display().to_string())
}

pub(crate) fn parse_edge_list(
    reader: impl Read,
    path: &str,
) -> Result<(Graph, EdgeListReport), GraphError> {
    let reader = BufReader::new(reader);
    let mut ids: Vec<String> = Vec::new();
    let mut id_index: HashMap<String, u32> = HashMap::new();
    let intern = |name: &str, ids: &mut Vec<String>, idx: &mut HashMap<String, u32>| -> u32 {
        if let Some(&v) = idx.get(name) {
            return v;
        }
        let v = ids.len() as u32;
        ids.push(name.to_string());
        idx.insert(name.to_string(), v);
        v
    };

    let mut edges: HashMap<(u32, u32), f64> = HashMap::new();
    let mut report = EdgeListReport::default();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| GraphError::Io {
            path: path.to_string(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let a = tokens.next();
        let b = tokens.next();
        let (a, b) = match (a, b) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(GraphError::MalformedLine {
                    line: lineno,
                    reason: "expected at least two whitespace-separated tokens".to_string(),
                })
            }
        };
        let weight = match tokens.next() {
            None => 1.0,
            Some(tok) => match tok.parse::<f64>() {
                Ok(w) if w.is_finite() && w > 0.0 => w,
                _ => {
                    return Err(GraphError::MalformedLine {
                        line: lineno,
                        reason: format!("weight {tok:?} is not a positive real"),
                    })
                }
            },
        };
        if a == b {
            report.self_loops_dropped += 1;
            continue;
        }
        let va = intern(a, &mut ids, &mut id_index);
        let vb = intern(b, &mut ids, &mut id_index);
        let key = (va.min(vb), va.max(vb));
        match edges.entry(key) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += weight;
                report.duplicates_merged += 1;
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(weight);
            }
        }
    }
    if edges.is_empty() {
        return Err(GraphError::NoEdges);
    }
    let graph = Graph::from_weighted_edges(
        ids,
        edges.into_iter().map(|((a, b), w)| (a, b, w)),
    )?;
    Ok((graph, report))
}

/// A named, possibly overlapping family of vertex sets (ground-truth
/// communities, protein complexes, mailing lists, ...).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    pub communities: Vec<Community>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Community {
    pub label: String,
    /// Member vertex ids, sorted and deduplicated.
    pub members: Vec<u32>,
}

impl LabelSet {
    /// Per-vertex membership lists (a vertex may appear in several
    /// communities, or none).
    pub fn memberships(&self, n: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); n];
        for (ci, c) in self.communities.iter().enumerate() {
            for &v in &c.members {
                out[v as usize].push(ci as u32);
            }
        }
        out
    }
}

/// What the label loader dropped while cleaning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LabelSetReport {
    /// Members that did not resolve to any graph vertex.
    pub unknown_members: usize,
    /// Communities whose members all failed to resolve.
    pub empty_dropped: usize,
    /// Communities excluded for having fewer than `min_size` resolvable
    /// members.
    pub small_dropped: usize,
}

/// Loads a label file: each non-blank, non-`#` line is
/// `label member member ...`. Members missing from the graph are dropped
/// (counted); communities that end up empty or below `min_size` are
/// excluded (counted).
pub fn load_label_set(
    path: impl AsRef<Path>,
    graph: &Graph,
    min_size: usize,
) -> Result<(LabelSet, LabelSetReport), GraphError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_label_set(BufReader::new(file), &path.display().to_string(), graph, min_size)
}

pub(crate) fn parse_label_set(
    reader: impl Read,
    path: &str,
    graph: &Graph,
    min_size: usize,
) -> Result<(LabelSet, LabelSetReport), GraphError> {
    let reader = BufReader::new(reader);
    let mut communities = Vec::new();
    let mut report = LabelSetReport::default();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| GraphError::Io {
            path: path.to_string(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label = match tokens.next() {
            Some(l) => l.to_string(),
            None => {
                return Err(GraphError::MalformedLine {
                    line: lineno,
                    reason: "expected a community label".to_string(),
                })
            }
        };
        let mut members: Vec<u32> = Vec::new();
        let mut saw_any = false;
        for tok in tokens {
            saw_any = true;
            match graph.resolve_id(tok) {
                Some(v) => members.push(v),
                None => report.unknown_members += 1,
            }
        }
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            // Covers both label-only lines and lines whose members all
            // failed to resolve.
            let _ = saw_any;
            report.empty_dropped += 1;
            continue;
        }
        if members.len() < min_size {
            report.small_dropped += 1;
            continue;
        }
        communities.push(Community { label, members });
    }
    Ok((LabelSet { communities }, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(text: &str) -> Result<(Graph, EdgeListReport), GraphError> {
        parse_edge_list(text.as_bytes(), "<test>")
    }

    #[test]
    fn loads_simple_edge_list_with_duplicate_merge() {
        let (g, report) = load_str("a b\nb c\na b\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(report.duplicates_merged, 1);
        let a = g.resolve_id("a").unwrap();
        let b = g.resolve_id("b").unwrap();
        let ab = g
            .neighbors(a)
            .iter()
            .find(|&&(u, _)| u == b)
            .map(|&(_, w)| w)
            .unwrap();
        assert_eq!(ab, 2.0);
    }

    #[test]
    fn ids_follow_first_appearance_order() {
        let (g, _) = load_str("b a\nc a\n").unwrap();
        assert_eq!(g.original_ids(), &["b", "a", "c"]);
    }

    #[test]
    fn degrees_and_totals_on_path() {
        let (g, _) = load_str("a b\nb c\n").unwrap();
        assert_eq!(g.degree(0), 1.0);
        assert_eq!(g.degree(1), 2.0);
        assert_eq!(g.total_weight(), 4.0);
        assert_eq!(g.edge_weight_total(), 2.0);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let (g, _) = load_str("# header\n\n  \na b\n# trailing\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_str("a b\nlonely\n").unwrap_err();
        match err {
            GraphError::MalformedLine { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_weights() {
        for bad in ["a b -1", "a b 0", "a b nope", "a b NaN", "a b inf"] {
            let err = load_str(bad).unwrap_err();
            assert!(matches!(err, GraphError::MalformedLine { line: 1, .. }), "{bad}");
        }
        let (g, _) = load_str("a b 2.5\n").unwrap();
        assert_eq!(g.edge_weight_total(), 2.5);
    }

    #[test]
    fn drops_self_loops_with_count() {
        let (g, report) = load_str("a a\na b\n").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(report.self_loops_dropped, 1);
    }

    #[test]
    fn zero_edges_is_an_error() {
        assert!(matches!(load_str("# nothing\n"), Err(GraphError::NoEdges)));
        assert!(matches!(load_str("a a\n"), Err(GraphError::NoEdges)));
    }

    #[test]
    fn extra_tokens_beyond_weight_are_ignored() {
        let (g, _) = load_str("a b 2.0 timestamp junk\n").unwrap();
        assert_eq!(g.edge_weight_total(), 2.0);
    }

    #[test]
    fn self_loop_counts_twice_in_degree_once_in_weight() {
        let g = Graph::from_weighted_edges(
            vec!["x".into(), "y".into()],
            vec![(0, 1, 1.0), (0, 0, 3.0)],
        )
        .unwrap();
        assert_eq!(g.degree(0), 7.0);
        assert_eq!(g.degree(1), 1.0);
        assert_eq!(g.edge_weight_total(), 4.0);
        assert_eq!(g.total_weight(), 8.0);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn lcc_picks_first_component_on_tie() {
        // Two triangles and an isolated edge; the triangle seen first wins.
        let (g, _) = load_str("a b\nb c\nc a\nd e\ne f\nf d\ng h\n").unwrap();
        let lcc = g.largest_connected_component();
        assert_eq!(lcc.vertex_count(), 3);
        assert_eq!(lcc.original_ids(), &["a", "b", "c"]);
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let (g, _) = load_str("a b\nb c\nc a\n").unwrap();
        assert_eq!(g.largest_connected_component(), g);
    }

    #[test]
    fn write_then_reload_round_trips() {
        let cases = [
            "a b\nb c\nc a\nd a 2.5\n",
            "x y\n",
            "n1 n2\nn3 n4\nn2 n3\n",
            "b a\nc a\nd c 0.5\nb d\n",
        ];
        for case in cases {
            let (g, _) = load_str(case).unwrap();
            let mut buf = Vec::new();
            g.write_edge_list(&mut buf).unwrap();
            let (g2, report) = parse_edge_list(buf.as_slice(), "<round-trip>").unwrap();
            assert_eq!(g2, g, "case {case:?}");
            assert_eq!(report, EdgeListReport::default());
        }
    }

    #[test]
    fn fingerprint_distinguishes_graphs() {
        let (g1, _) = load_str("a b\nb c\n").unwrap();
        let (g2, _) = load_str("a b\nb c\nc a\n").unwrap();
        let (g3, _) = load_str("a b\nb c\n").unwrap();
        assert_eq!(g1.fingerprint(), g3.fingerprint());
        assert_ne!(g1.fingerprint(), g2.fingerprint());
    }

    #[test]
    fn connectivity_check() {
        let (g, _) = load_str("a b\nc d\n").unwrap();
        assert!(!g.is_connected());
        assert!(g.largest_connected_component().is_connected());
    }

    #[test]
    fn label_loader_drops_unknown_and_small() {
        let (g, _) = load_str("a b\nb c\nc d\nd e\n").unwrap();
        let labels = "big a b c ghost\nsmall d e\nempty ghost2\n";
        let (set, report) = parse_label_set(labels.as_bytes(), "<test>", &g, 3).unwrap();
        assert_eq!(set.communities.len(), 1);
        assert_eq!(set.communities[0].label, "big");
        assert_eq!(set.communities[0].members.len(), 3);
        assert_eq!(report.unknown_members, 2);
        assert_eq!(report.small_dropped, 1);
        assert_eq!(report.empty_dropped, 1);
    }

    #[test]
    fn label_loader_dedupes_members() {
        let (g, _) = load_str("a b\nb c\n").unwrap();
        let (set, _) = parse_label_set("one a a b\n".as_bytes(), "<test>", &g, 2).unwrap();
        assert_eq!(set.communities[0].members.len(), 2);
    }

    #[test]
    fn memberships_inverts_communities() {
        let (g, _) = load_str("a b\nb c\n").unwrap();
        let (set, _) =
            parse_label_set("x a b\ny b c\n".as_bytes(), "<test>", &g, 2).unwrap();
        let m = set.memberships(g.vertex_count());
        assert_eq!(m[0], vec![0]);
        assert_eq!(m[1], vec![0, 1]);
        assert_eq!(m[2], vec![1]);
    }
}
