//! Ensemble modularity partitions for seed-driven community queries.
//!
//! The pipeline: load an undirected graph, build an ensemble of locally
//! optimal modularity partitions (Louvain runs started from random cut-set
//! partitions), then rank vertices by how often they co-cluster with a seed
//! set across the ensemble. A restart random walk provides a baseline, and a
//! synthetic benchmark plus ROC harness measure retrieval quality.

pub mod ensemble;
pub mod eval;
pub mod graph;
pub mod hashing;
pub mod lfr;
pub mod louvain;
pub mod partition;
pub mod query;
pub mod rwr;

pub use ensemble::{build_index, load_index, EnsembleIndex, IndexBuildConfig};
pub use graph::{load_edge_list, load_label_set, Graph, LabelSet};
pub use louvain::{louvain, LouvainConfig, LouvainResult};
pub use partition::{modularity, random_cut_partition, CutSeedConfig, Partition};
pub use query::{expansion_scores, rank_query, QueryResult, QuerySet};
pub use rwr::{rwr_scores, RwrConfig, RwrResult};
