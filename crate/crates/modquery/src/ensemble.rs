//! Ensembles of locally optimal partitions, and their on-disk format.
//!
//! An index is `P` Louvain runs over the same graph, each started from its
//! own random cut-set partition. Run `r` draws every random decision from
//! `derive_run_seed(master_seed, r)`, so the ensemble is reproducible and
//! embarrassingly parallel: any worker count and any scheduling produce the
//! same bytes.
//!
//! File layout (little-endian): magic `MQIX`, format version (u32), flags
//! (u32, zero), `n` (u64), `P` (u64), master seed (u64), cut probability
//! (f64), graph fingerprint (u64), then `P` blocks of `n` u32 community
//! labels, then `P` f64 modularity values, then a CRC-64/XZ of every
//! preceding byte. A `<path>.nodes` sidecar lists one original vertex id
//! per line (line number = vertex id).

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::graph::Graph;
use crate::hashing::{crc64, mix_seed};
use crate::louvain::{louvain, LouvainConfig};
use crate::partition::{random_cut_partition, CutSeedConfig};

const MAGIC: &[u8; 4] = b"MQIX";
const FORMAT_VERSION: u32 = 1;
/// magic + version + flags + n + P + seed + p_cut + fingerprint
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 + 8 + 8 + 8;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("graph is not connected; build the index on its largest component")]
    NotConnected,
    #[error("invalid build config: {0}")]
    BadConfig(String),
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported index format version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("checksum mismatch: index file is corrupt or truncated")]
    ChecksumMismatch,
    #[error("index was built for a different graph (fingerprint mismatch)")]
    FingerprintMismatch,
    #[error("index file is structurally malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Partition(#[from] crate::partition::PartitionError),
}

/// Seed for ensemble run `r`: a SplitMix64-style finalizer over the master
/// seed and the run number. Frozen — stored indexes depend on it.
pub fn derive_run_seed(master_seed: u64, run: u64) -> u64 {
    mix_seed(master_seed, run)
}

/// Parameters for building an ensemble index.
#[derive(Clone, Debug, serde::Serialize)]
pub struct IndexBuildConfig {
    /// Ensemble size `P`.
    pub num_partitions: usize,
    /// Probability each edge joins the cut set of a starting partition.
    pub p_cut: f64,
    pub master_seed: u64,
    /// Optimizer settings. `rng_seed` is ignored: each run derives its own.
    pub louvain: LouvainConfig,
    /// Worker thread count; 0 means use the global pool. Has no effect on
    /// the result, only on wall-clock time.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for IndexBuildConfig {
    fn default() -> Self {
        IndexBuildConfig {
            num_partitions: 2000,
            p_cut: 0.5,
            master_seed: 0,
            louvain: LouvainConfig::default(),
            workers: 0,
        }
    }
}

/// A built ensemble: `P` label arrays over the same `n` vertices plus the
/// modularity each run reached. Vertex ids ride along in memory for
/// reporting; on disk they live in the `.nodes` sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleIndex {
    n: usize,
    /// `P * n` labels, partition-major.
    labels: Vec<u32>,
    q_values: Vec<f64>,
    master_seed: u64,
    p_cut: f64,
    graph_fingerprint: u64,
    node_ids: Vec<String>,
}

impl EnsembleIndex {
    /// Assembles an index from parts (tests and loaders; `build_index` is
    /// the normal constructor).
    pub fn from_parts(
        n: usize,
        labels: Vec<u32>,
        q_values: Vec<f64>,
        master_seed: u64,
        p_cut: f64,
        graph_fingerprint: u64,
        node_ids: Vec<String>,
    ) -> Result<EnsembleIndex, IndexError> {
        let p = q_values.len();
        if n == 0 || p == 0 {
            return Err(IndexError::BadConfig("empty index".to_string()));
        }
        if labels.len() != n * p {
            return Err(IndexError::Malformed(format!(
                "expected {} labels, found {}",
                n * p,
                labels.len()
            )));
        }
        if node_ids.len() != n {
            return Err(IndexError::Malformed(format!(
                "expected {} node ids, found {}",
                n,
                node_ids.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= n) {
            return Err(IndexError::Malformed(format!(
                "community label {bad} out of range for n = {n}"
            )));
        }
        Ok(EnsembleIndex {
            n,
            labels,
            q_values,
            master_seed,
            p_cut,
            graph_fingerprint,
            node_ids,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Ensemble size `P`.
    pub fn partition_count(&self) -> usize {
        self.q_values.len()
    }

    /// Community labels of run `r`, one per vertex.
    pub fn partition(&self, r: usize) -> &[u32] {
        &self.labels[r * self.n..(r + 1) * self.n]
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn p_cut(&self) -> f64 {
        self.p_cut
    }

    pub fn graph_fingerprint(&self) -> u64 {
        self.graph_fingerprint
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn resolve_id(&self, name: &str) -> Option<u32> {
        self.node_ids
            .iter()
            .position(|id| id == name)
            .map(|i| i as u32)
    }
}

/// Runs the ensemble. The graph must be connected (take the largest
/// component first); every run is independent and seeded from
/// `derive_run_seed(master_seed, r)`.
pub fn build_index(graph: &Graph, cfg: &IndexBuildConfig) -> Result<EnsembleIndex, IndexError> {
    if cfg.num_partitions == 0 {
        return Err(IndexError::BadConfig("num_partitions must be positive".into()));
    }
    if !(0.0..=1.0).contains(&cfg.p_cut) {
        return Err(IndexError::BadConfig(format!(
            "p_cut {} outside [0, 1]",
            cfg.p_cut
        )));
    }
    if !graph.is_connected() {
        return Err(IndexError::NotConnected);
    }

    let run = |r: usize| -> Result<(Vec<u32>, f64), IndexError> {
        let seed = derive_run_seed(cfg.master_seed, r as u64);
        let start = random_cut_partition(
            graph,
            &CutSeedConfig {
                p_cut: cfg.p_cut,
                rng_seed: seed,
            },
        );
        let louvain_cfg = LouvainConfig {
            rng_seed: seed,
            ..cfg.louvain
        };
        let res = louvain(graph, &start, &louvain_cfg)?;
        Ok((res.partition.labels().to_vec(), res.q))
    };

    let collect = || -> Result<Vec<(Vec<u32>, f64)>, IndexError> {
        (0..cfg.num_partitions)
            .into_par_iter()
            .map(run)
            .collect()
    };
    let runs = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| IndexError::BadConfig(e.to_string()))?;
        pool.install(collect)?
    } else {
        collect()?
    };

    let n = graph.vertex_count();
    let mut labels = Vec::with_capacity(n * cfg.num_partitions);
    let mut q_values = Vec::with_capacity(cfg.num_partitions);
    for (run_labels, q) in runs {
        labels.extend_from_slice(&run_labels);
        q_values.push(q);
    }
    EnsembleIndex::from_parts(
        n,
        labels,
        q_values,
        cfg.master_seed,
        cfg.p_cut,
        graph.fingerprint(),
        graph.original_ids().to_vec(),
    )
}

fn serialize(idx: &EnsembleIndex) -> Vec<u8> {
    let p = idx.partition_count();
    let mut buf = Vec::with_capacity(HEADER_LEN + idx.labels.len() * 4 + p * 8 + 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes()); // flags
    buf.extend_from_slice(&(idx.n as u64).to_le_bytes());
    buf.extend_from_slice(&(p as u64).to_le_bytes());
    buf.extend_from_slice(&idx.master_seed.to_le_bytes());
    buf.extend_from_slice(&idx.p_cut.to_le_bytes());
    buf.extend_from_slice(&idx.graph_fingerprint.to_le_bytes());
    for &label in &idx.labels {
        buf.extend_from_slice(&label.to_le_bytes());
    }
    for &q in &idx.q_values {
        buf.extend_from_slice(&q.to_le_bytes());
    }
    let crc = crc64(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".nodes");
    PathBuf::from(name)
}

/// Writes bytes to `path` atomically: temp file in the same directory,
/// fsync, rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = {
        let mut name = path.as_os_str().to_owned();
        name.push(format!(".tmp.{}", std::process::id()));
        PathBuf::from(name)
    };
    let result = (|| {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

/// Saves the index and its `.nodes` sidecar. Both writes are atomic and
/// synced before return.
pub fn save_index(idx: &EnsembleIndex, path: impl AsRef<Path>) -> Result<(), IndexError> {
    let path = path.as_ref();
    let io_err = |source| IndexError::Io {
        path: path.display().to_string(),
        source,
    };
    write_atomic(path, &serialize(idx)).map_err(io_err)?;
    let mut nodes = String::new();
    for id in &idx.node_ids {
        nodes.push_str(id);
        nodes.push('\n');
    }
    let sidecar = sidecar_path(path);
    write_atomic(&sidecar, nodes.as_bytes()).map_err(|source| IndexError::Io {
        path: sidecar.display().to_string(),
        source,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> &'a [u8] {
        let slice = &self.bytes[self.at..self.at + len];
        self.at += len;
        slice
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take(4).try_into().unwrap())
    }
    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take(8).try_into().unwrap())
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take(8).try_into().unwrap())
    }
}

fn deserialize(bytes: &[u8], node_ids: Vec<String>) -> Result<EnsembleIndex, IndexError> {
    if bytes.len() >= 4 && &bytes[..4] != MAGIC {
        return Err(IndexError::BadMagic);
    }
    if bytes.len() < HEADER_LEN + 8 {
        return Err(IndexError::ChecksumMismatch);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 8);
    let stored_crc = u64::from_le_bytes(trailer.try_into().unwrap());
    if crc64(body) != stored_crc {
        return Err(IndexError::ChecksumMismatch);
    }

    let mut cur = Cursor { bytes: body, at: 4 };
    let version = cur.u32();
    if version != FORMAT_VERSION {
        return Err(IndexError::VersionMismatch { found: version });
    }
    let _flags = cur.u32();
    let n = cur.u64() as usize;
    let p = cur.u64() as usize;
    let master_seed = cur.u64();
    let p_cut = cur.f64();
    let fingerprint = cur.u64();

    let expected = HEADER_LEN + n.saturating_mul(p).saturating_mul(4) + p * 8;
    if body.len() != expected {
        return Err(IndexError::Malformed(format!(
            "file length {} does not match header (n = {n}, P = {p})",
            bytes.len()
        )));
    }
    let mut labels = Vec::with_capacity(n * p);
    for _ in 0..n * p {
        labels.push(cur.u32());
    }
    let mut q_values = Vec::with_capacity(p);
    for _ in 0..p {
        q_values.push(cur.f64());
    }
    let ids = if node_ids.is_empty() {
        (0..n).map(|i| i.to_string()).collect()
    } else {
        node_ids
    };
    EnsembleIndex::from_parts(n, labels, q_values, master_seed, p_cut, fingerprint, ids)
}

/// Loads an index and verifies it belongs to `graph` (checksum first, then
/// fingerprint). Vertex ids come from the graph.
pub fn load_index(path: impl AsRef<Path>, graph: &Graph) -> Result<EnsembleIndex, IndexError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| IndexError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut idx = deserialize(&bytes, Vec::new())?;
    if idx.n != graph.vertex_count() || idx.graph_fingerprint != graph.fingerprint() {
        return Err(IndexError::FingerprintMismatch);
    }
    idx.node_ids = graph.original_ids().to_vec();
    Ok(idx)
}

/// Loads an index without a graph, taking vertex ids from the `.nodes`
/// sidecar. The checksum still applies but the fingerprint cannot be
/// verified — expansion queries work, anything needing edges does not.
pub fn load_index_raw(path: impl AsRef<Path>) -> Result<EnsembleIndex, IndexError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| IndexError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let sidecar = sidecar_path(path);
    let nodes = std::fs::read_to_string(&sidecar).map_err(|source| IndexError::Io {
        path: sidecar.display().to_string(),
        source,
    })?;
    let node_ids: Vec<String> = nodes.lines().map(|l| l.to_string()).collect();
    deserialize(&bytes, node_ids)
}
