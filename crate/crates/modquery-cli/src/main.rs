//! `modquery`: build partition-ensemble indexes over networks, query them
//! with seed sets, generate planted benchmarks, and run ROC evaluations.
//!
//! Every subcommand writes a JSON manifest capturing the resolved
//! configuration, seeds, and input digests, so any run can be reproduced
//! from its outputs alone. Exit codes: 0 success, 2 usage, 3 I/O,
//! 4 malformed input, 5 failed precondition, 6 non-convergence.

mod commands;
mod errors;
mod manifest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use errors::CliError;

#[derive(Parser)]
#[command(name = "modquery", version, about = "Ensemble community queries over networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a partition-ensemble index from an edge list.
    Index(IndexArgs),
    /// Rank vertices against a seed set using a built index.
    Query(QueryArgs),
    /// Generate a planted-community benchmark network.
    Generate(GenerateArgs),
    /// Cross-validate query methods against labelled communities.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct IndexArgs {
    /// Input edge list (whitespace separated, `#` comments).
    edge_list: std::path::PathBuf,
    /// Output index file; a `.nodes` id sidecar is written next to it.
    output: std::path::PathBuf,
    /// Ensemble size (number of locally optimal partitions).
    #[arg(long, default_value_t = 2000)]
    partitions: usize,
    /// Probability that an edge joins the random starting cut set.
    #[arg(long, default_value_t = 0.5)]
    p_cut: f64,
    /// Master seed (overrides MODQUERY_SEED; default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the build; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum QueryMethod {
    /// Ensemble co-clustering score.
    Expansion,
    /// Random walk with restart.
    Rwr,
}

#[derive(Args)]
struct QueryArgs {
    /// Index file produced by `modquery index`.
    #[arg(long)]
    index: std::path::PathBuf,
    /// Edge list the index was built from. Optional for --method
    /// expansion; required for --method rwr.
    #[arg(long)]
    graph: Option<std::path::PathBuf>,
    /// Comma-separated seed vertex ids.
    #[arg(long)]
    seeds: Option<String>,
    /// File of seed ids, one per line (`#` comments allowed).
    #[arg(long)]
    seeds_file: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = QueryMethod::Expansion)]
    method: QueryMethod,
    /// Emit only the best k non-seed vertices.
    #[arg(long)]
    top_k: Option<usize>,
    /// Keep the seeds themselves in the ranking.
    #[arg(long)]
    include_seeds: bool,
    /// Restart probability for --method rwr.
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    /// L1 convergence tolerance for --method rwr.
    #[arg(long, default_value_t = 1e-10)]
    rwr_tolerance: f64,
    /// Write the ranking CSV here instead of stdout (manifest goes to
    /// `<output>.manifest.json`; with stdout the manifest prints to
    /// stderr).
    #[arg(long, short)]
    output: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Output prefix: writes `<prefix>.edges`, `<prefix>.labels`, and
    /// `<prefix>.manifest.json`.
    output_prefix: std::path::PathBuf,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Fraction of each vertex's edges leaving its communities.
    #[arg(long)]
    mixing: f64,
    #[arg(long, default_value_t = 20.0)]
    avg_degree: f64,
    #[arg(long, default_value_t = 50)]
    max_degree: usize,
    /// Degree power-law exponent.
    #[arg(long, default_value_t = 2.0)]
    tau_degree: f64,
    /// Community-size power-law exponent.
    #[arg(long, default_value_t = 1.0)]
    tau_community: f64,
    #[arg(long, default_value_t = 10)]
    min_community: usize,
    #[arg(long, default_value_t = 100)]
    max_community: usize,
    /// Fraction of vertices placed in more than one community.
    #[arg(long, default_value_t = 0.0)]
    overlap_fraction: f64,
    /// Overlapping vertices get 2..=this many memberships.
    #[arg(long, default_value_t = 4)]
    memberships_per_overlap: usize,
    /// Master seed (overrides MODQUERY_SEED; default 0).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Input edge list.
    edge_list: std::path::PathBuf,
    /// Community label file: one community per line, label then members.
    labels: std::path::PathBuf,
    /// Directory for summary.csv, communities.csv, roc.csv, manifest.json.
    #[arg(long)]
    output_dir: std::path::PathBuf,
    /// Reuse an existing index instead of building one.
    #[arg(long)]
    index: Option<std::path::PathBuf>,
    /// Ensemble size when building (ignored with --index).
    #[arg(long, default_value_t = 2000)]
    partitions: usize,
    /// Cut-set probability when building (ignored with --index).
    #[arg(long, default_value_t = 0.5)]
    p_cut: f64,
    /// Drop labelled communities smaller than this.
    #[arg(long, default_value_t = 2)]
    min_size: usize,
    /// Comma-separated seed-set sizes.
    #[arg(long, default_value = "3,7,15")]
    seed_sizes: String,
    /// Per (community, size): exhaustive below, sampled above.
    #[arg(long, default_value_t = 120)]
    max_subsets: usize,
    /// FPR grid resolution of the averaged ROC curve.
    #[arg(long, default_value_t = 1001)]
    roc_grid: usize,
    /// Comma-separated subset of {expansion, rwr}.
    #[arg(long, default_value = "expansion,rwr")]
    methods: String,
    /// Restart probability for the rwr baseline.
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    /// L1 convergence tolerance for the rwr baseline.
    #[arg(long, default_value_t = 1e-10)]
    rwr_tolerance: f64,
    /// Master seed (overrides MODQUERY_SEED; default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for an index build; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

/// Seed precedence: explicit flag, then MODQUERY_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("MODQUERY_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::usage(format!("MODQUERY_SEED is not an unsigned integer: {raw:?}"))
        }),
        Err(_) => Ok(0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Index(args) => commands::cmd_index(args),
        Command::Query(args) => commands::cmd_query(args),
        Command::Generate(args) => commands::cmd_generate(args),
        Command::Evaluate(args) => commands::cmd_evaluate(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
