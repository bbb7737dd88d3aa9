//! Implementations of the four subcommands. Each one loads its inputs,
//! delegates the real work to the library, writes outputs atomically, and
//! records a manifest describing exactly what ran.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use modquery::ensemble::{build_index, load_index, load_index_raw, save_index, IndexBuildConfig};
use modquery::eval::{evaluate_network, EvalConfig, EvalReport, Method};
use modquery::graph::{load_edge_list, load_label_set, write_label_set, Graph};
use modquery::lfr::{generate, LfrConfig};
use modquery::query::{expansion_scores, rank_scores, seed_cohesion, QuerySet};
use modquery::rwr::{rwr_scores, RwrConfig};

use crate::errors::CliError;
use crate::manifest::{atomic_write, RunManifest};
use crate::{EvaluateArgs, GenerateArgs, IndexArgs, QueryArgs, QueryMethod};

/// Appends a suffix to a path without touching its extension handling
/// (`out/run1` + `.edges` = `out/run1.edges`).
fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

/// Quotes a CSV field only when it needs it (ids may contain commas).
fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains(',') || s.contains('"') {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

/// Loads an edge list, reduces to the largest connected component when
/// needed, and reports every cleanup on stderr (and back to the caller for
/// the manifest).
fn load_graph(path: &Path) -> Result<(Graph, Vec<String>), CliError> {
    let (graph, report) = load_edge_list(path)?;
    let mut notes = Vec::new();
    if report.self_loops_dropped > 0 {
        notes.push(format!("dropped {} self-loop line(s)", report.self_loops_dropped));
    }
    if report.duplicates_merged > 0 {
        notes.push(format!("merged {} duplicate edge line(s)", report.duplicates_merged));
    }
    let graph = if graph.is_connected() {
        graph
    } else {
        let lcc = graph.largest_connected_component();
        notes.push(format!(
            "graph is not connected: kept the largest component ({} of {} vertices)",
            lcc.vertex_count(),
            graph.vertex_count()
        ));
        lcc
    };
    for note in &notes {
        eprintln!("note: {note}");
    }
    Ok((graph, notes))
}

pub fn cmd_index(args: IndexArgs) -> Result<(), CliError> {
    let seed = crate::resolve_seed(args.seed)?;
    let t_total = Instant::now();
    let (graph, notes) = load_graph(&args.edge_list)?;

    let cfg = IndexBuildConfig {
        num_partitions: args.partitions,
        p_cut: args.p_cut,
        master_seed: seed,
        louvain: Default::default(),
        workers: args.workers,
    };
    let mut manifest = RunManifest::new("index", seed, serde_json::to_value(&cfg)?);
    manifest.notes = notes;
    manifest.add_input(&args.edge_list)?;

    let t_build = Instant::now();
    let index = build_index(&graph, &cfg)?;
    manifest.add_timing("build", t_build);

    save_index(&index, &args.output)?;
    manifest.add_output(&args.output);
    manifest.add_output(&with_suffix(&args.output, ".nodes"));
    manifest.add_timing("total", t_total);
    manifest.write(&with_suffix(&args.output, ".manifest.json"))?;

    let mean_q =
        index.q_values().iter().sum::<f64>() / index.partition_count() as f64;
    println!(
        "indexed {} vertices / {} edges: {} partitions, mean modularity {:.6}",
        graph.vertex_count(),
        graph.edge_count(),
        index.partition_count(),
        mean_q
    );
    Ok(())
}

/// Collects seed tokens from `--seeds` and/or `--seeds-file`.
fn gather_seed_tokens(args: &QueryArgs) -> Result<Vec<String>, CliError> {
    let mut tokens: Vec<String> = Vec::new();
    if let Some(list) = &args.seeds {
        tokens.extend(
            list.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(String::from),
        );
    }
    if let Some(path) = &args.seeds_file {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            tokens.extend(line.split_whitespace().map(String::from));
        }
    }
    if tokens.is_empty() {
        return Err(CliError::usage(
            "no seeds given: pass --seeds id1,id2,... and/or --seeds-file FILE",
        ));
    }
    Ok(tokens)
}

pub fn cmd_query(args: QueryArgs) -> Result<(), CliError> {
    let t_total = Instant::now();
    let tokens = gather_seed_tokens(&args)?;
    if matches!(args.method, QueryMethod::Rwr) && args.graph.is_none() {
        return Err(CliError::usage("--method rwr needs the edges: pass --graph"));
    }

    // With a graph we can verify the index fingerprint; without one the
    // vertex ids come from the `.nodes` sidecar.
    let graph = match &args.graph {
        Some(path) => Some(load_graph(path)?.0),
        None => None,
    };
    let index = match &graph {
        Some(g) => load_index(&args.index, g)?,
        None => load_index_raw(&args.index)?,
    };

    let lookup: HashMap<&str, u32> = index
        .node_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i as u32))
        .collect();
    let mut resolved = Vec::new();
    let mut unknown = Vec::new();
    for token in &tokens {
        match lookup.get(token.as_str()) {
            Some(&v) => resolved.push(v),
            None => unknown.push(token.clone()),
        }
    }
    if !unknown.is_empty() {
        unknown.sort();
        unknown.dedup();
        return Err(CliError::precondition(format!(
            "unknown seed id(s): {}",
            unknown.join(", ")
        )));
    }
    let query = QuerySet::new(resolved, index.vertex_count())?;
    let seed_ids: Vec<String> = query
        .seeds()
        .iter()
        .map(|&v| index.node_ids()[v as usize].clone())
        .collect();

    // Expansion scores are always available (the index is in hand) and give
    // the cohesion diagnostic even when ranking by the walk.
    let expansion = expansion_scores(&index, &query)?;
    let mut notes = Vec::new();
    let walk = match args.method {
        QueryMethod::Expansion => None,
        QueryMethod::Rwr => {
            let rwr_cfg = RwrConfig {
                alpha: args.alpha,
                l1_tolerance: args.rwr_tolerance,
                ..RwrConfig::default()
            };
            let walk = rwr_scores(graph.as_ref().unwrap(), &query, &rwr_cfg)?;
            notes.push(format!(
                "walk converged after {} iterations (residual {:e})",
                walk.iterations, walk.residual
            ));
            Some(walk)
        }
    };
    let (scores, method_label): (&[f64], &str) = match &walk {
        Some(walk) => (&walk.scores, "rwr"),
        None => (&expansion.scores, "expansion"),
    };

    let ranked = rank_scores(
        index.node_ids(),
        scores,
        &expansion.is_seed,
        args.include_seeds,
        args.top_k,
    );

    let mut csv = String::from("rank,id,score,seed\n");
    for (rank, (id, score)) in ranked.iter().enumerate() {
        let is_seed = lookup
            .get(id.as_str())
            .map(|&v| expansion.is_seed[v as usize])
            .unwrap_or(false);
        csv.push_str(&format!(
            "{},{},{},{}\n",
            rank + 1,
            csv_field(id),
            score,
            is_seed
        ));
    }

    let config = serde_json::json!({
        "index": args.index.display().to_string(),
        "graph": args.graph.as_ref().map(|p| p.display().to_string()),
        "method": method_label,
        "seeds": seed_ids,
        "include_seeds": args.include_seeds,
        "top_k": args.top_k,
        "alpha": args.alpha,
        "rwr_tolerance": args.rwr_tolerance,
        "partitions": index.partition_count(),
    });
    let mut manifest = RunManifest::new("query", index.master_seed(), config);
    manifest.notes = notes;
    manifest.add_input(&args.index)?;
    if let Some(path) = &args.graph {
        manifest.add_input(path)?;
    }
    if let Some(path) = &args.seeds_file {
        manifest.add_input(path)?;
    }

    if let Some(c) = seed_cohesion(&expansion) {
        eprintln!("seed cohesion: {c:.6}");
        manifest.notes.push(format!("seed_cohesion={c}"));
    }
    manifest.add_timing("total", t_total);

    match &args.output {
        Some(path) => {
            atomic_write(path, csv.as_bytes())?;
            manifest.add_output(path);
            manifest.write(&with_suffix(path, ".manifest.json"))?;
        }
        None => {
            print!("{csv}");
            eprintln!("{}", manifest.to_json()?);
        }
    }
    Ok(())
}

pub fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let seed = crate::resolve_seed(args.seed)?;
    let t_total = Instant::now();
    let cfg = LfrConfig {
        n: args.n,
        avg_degree: args.avg_degree,
        max_degree: args.max_degree,
        tau_degree: args.tau_degree,
        tau_community: args.tau_community,
        min_community: args.min_community,
        max_community: args.max_community,
        mixing: args.mixing,
        overlap_fraction: args.overlap_fraction,
        memberships_per_overlap: args.memberships_per_overlap,
        rng_seed: seed,
    };
    let network = generate(&cfg)?;

    let edges_path = with_suffix(&args.output_prefix, ".edges");
    let labels_path = with_suffix(&args.output_prefix, ".labels");
    let mut edge_bytes = Vec::new();
    network.graph.write_edge_list(&mut edge_bytes)?;
    atomic_write(&edges_path, &edge_bytes)?;
    let mut label_bytes = Vec::new();
    write_label_set(&network.truth, &network.graph, &mut label_bytes)?;
    atomic_write(&labels_path, &label_bytes)?;

    let mut manifest = RunManifest::new("generate", seed, serde_json::to_value(&cfg)?);
    manifest.add_output(&edges_path);
    manifest.add_output(&labels_path);
    manifest
        .notes
        .push(format!("realized_mixing={}", network.realized_mixing));
    manifest.notes.push(format!(
        "diagnostics={}",
        serde_json::to_string(&network.diagnostics)?
    ));
    manifest.add_timing("total", t_total);
    manifest.write(&with_suffix(&args.output_prefix, ".manifest.json"))?;

    println!(
        "generated {} vertices / {} edges, {} communities, realized mixing {:.4}",
        network.graph.vertex_count(),
        network.graph.edge_count(),
        network.truth.communities.len(),
        network.realized_mixing
    );
    Ok(())
}

fn parse_seed_sizes(raw: &str) -> Result<Vec<usize>, CliError> {
    let mut sizes = Vec::new();
    for tok in raw.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        sizes.push(tok.parse::<usize>().map_err(|_| {
            CliError::usage(format!("--seed-sizes: {tok:?} is not a positive integer"))
        })?);
    }
    if sizes.is_empty() {
        return Err(CliError::usage("--seed-sizes is empty"));
    }
    Ok(sizes)
}

fn parse_methods(raw: &str) -> Result<Vec<Method>, CliError> {
    let mut methods = Vec::new();
    for tok in raw.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let m = match tok {
            "expansion" => Method::Expansion,
            "rwr" => Method::Rwr,
            other => {
                return Err(CliError::usage(format!(
                    "--methods: unknown method {other:?} (expected expansion or rwr)"
                )))
            }
        };
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(CliError::usage("--methods is empty"));
    }
    Ok(methods)
}

fn summary_csv(report: &EvalReport) -> String {
    let mut out = String::from("method,seed_size,n_trials,mean_auc,std_auc,mean_curve_auc\n");
    for s in &report.summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.method.label(),
            s.seed_size,
            s.n_trials,
            s.mean_auc,
            s.std_auc,
            s.mean_curve_auc
        ));
    }
    out
}

fn communities_csv(report: &EvalReport) -> String {
    let mut out = String::from("method,seed_size,community,n_trials,mean_auc\n");
    for s in &report.summaries {
        for c in &s.per_community {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.method.label(),
                s.seed_size,
                csv_field(&c.label),
                c.n_trials,
                c.mean_auc
            ));
        }
    }
    out
}

fn roc_csv(report: &EvalReport) -> String {
    let mut out = String::from("method,seed_size,fpr,mean_tpr\n");
    for s in &report.summaries {
        for (fpr, tpr) in s.fpr.iter().zip(&s.mean_tpr) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.method.label(),
                s.seed_size,
                fpr,
                tpr
            ));
        }
    }
    out
}

pub fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let seed = crate::resolve_seed(args.seed)?;
    let t_total = Instant::now();
    let seed_sizes = parse_seed_sizes(&args.seed_sizes)?;
    let methods = parse_methods(&args.methods)?;

    let (graph, mut notes) = load_graph(&args.edge_list)?;
    let (labels, label_report) = load_label_set(&args.labels, &graph, args.min_size)?;
    if label_report.unknown_members > 0 {
        notes.push(format!(
            "dropped {} label member(s) missing from the graph",
            label_report.unknown_members
        ));
    }
    if label_report.empty_dropped + label_report.small_dropped > 0 {
        notes.push(format!(
            "excluded {} empty and {} under-sized communities",
            label_report.empty_dropped, label_report.small_dropped
        ));
    }

    let t_index = Instant::now();
    let index = match &args.index {
        Some(path) => {
            notes.push(format!("reused index {}", path.display()));
            load_index(path, &graph)?
        }
        None => {
            let build_cfg = IndexBuildConfig {
                num_partitions: args.partitions,
                p_cut: args.p_cut,
                master_seed: seed,
                louvain: Default::default(),
                workers: args.workers,
            };
            build_index(&graph, &build_cfg)?
        }
    };

    let eval_cfg = EvalConfig {
        seed_sizes,
        max_subsets: args.max_subsets,
        rng_seed: seed,
        roc_grid_points: args.roc_grid,
        methods,
        rwr: RwrConfig {
            alpha: args.alpha,
            l1_tolerance: args.rwr_tolerance,
            ..RwrConfig::default()
        },
    };
    let mut manifest = RunManifest::new("evaluate", seed, serde_json::to_value(&eval_cfg)?);
    manifest.add_input(&args.edge_list)?;
    manifest.add_input(&args.labels)?;
    if let Some(path) = &args.index {
        manifest.add_input(path)?;
    }
    manifest.add_timing("index", t_index);

    let t_eval = Instant::now();
    let report = evaluate_network(&graph, &index, &labels, &eval_cfg)?;
    manifest.add_timing("evaluate", t_eval);

    notes.push(format!("degenerate_trials={}", report.degenerate_trials));
    for (label, size) in &report.skipped {
        notes.push(format!(
            "community {label:?} skipped at seed size {size} (too few members)"
        ));
    }
    manifest.notes = notes;

    fs::create_dir_all(&args.output_dir).map_err(|e| {
        CliError::io(format!("cannot create {}: {e}", args.output_dir.display()))
    })?;
    let files = [
        ("summary.csv", summary_csv(&report)),
        ("communities.csv", communities_csv(&report)),
        ("roc.csv", roc_csv(&report)),
    ];
    for (name, contents) in &files {
        let path = args.output_dir.join(name);
        atomic_write(&path, contents.as_bytes())?;
        manifest.add_output(&path);
    }
    manifest.add_timing("total", t_total);
    manifest.write(&args.output_dir.join("manifest.json"))?;

    for s in &report.summaries {
        println!(
            "{} s={}: mean AUC {:.4} (sd {:.4}, {} trials)",
            s.method.label(),
            s.seed_size,
            s.mean_auc,
            s.std_auc,
            s.n_trials
        );
    }
    Ok(())
}
