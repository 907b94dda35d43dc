//! `hyperrec` — staged command-line front end for the hypergraph walk
//! recommendation pipeline.
//!
//! Stages persist their outputs in an artifact directory and each stage
//! consumes the previous stage's file, cross-checked by graph fingerprint:
//!
//! ```text
//! synth → build-graph → walk → train → recommend
//!                 \
//!                  `→ evaluate / ablate   (run the fold protocol in-process)
//! ```
//!
//! Configuration comes from defaults, overridden by a `key = value` file
//! (`--config`), overridden by flags. Exit codes: 0 success, 1 validation,
//! 2 I/O, 3 internal.

mod config;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use hyperrec_core::dataset::{filter_top_k_per_user, Catalog, InteractionTable, TagTable};
use hyperrec_core::embedding::{train_skipgram, EmbeddingTable};
use hyperrec_core::hypergraph::{Hypergraph, VertexKind};
use hyperrec_core::parallel::configure_threads;
use hyperrec_core::pipeline::{self, candidate_tracks};
use hyperrec_core::ranker::write_recommendations;
use hyperrec_core::synthetic::generate_synthetic;
use hyperrec_core::walker::{generate_walks, WalkCorpus};
use hyperrec_core::{Error, Result};

use crate::config::{apply_file, parse_disabled_edges, Settings, SynthShape};

#[derive(Parser)]
#[command(
    name = "hyperrec",
    version,
    about = "Diversity-aware music recommendations from weighted hypergraph walks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Flat key=value configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Artifact directory stages read from and write to.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Master seed steering splits, walks, and training.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Thread cap for walk generation and training; 0 means all cores.
    /// HYPERREC_THREADS is consulted when the flag is absent.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Walks started per vertex (r).
    #[arg(long, global = true, value_name = "R")]
    iterations: Option<u32>,

    /// Vertices per walk (k).
    #[arg(long, global = true, value_name = "K")]
    walk_length: Option<u32>,

    /// Probability of keeping the current hyperedge at each step.
    #[arg(long, global = true, value_name = "P")]
    stay_prob: Option<f64>,

    /// Embedding dimension (s).
    #[arg(long, global = true, value_name = "S")]
    dim: Option<usize>,

    /// Skip-gram context window (w).
    #[arg(long, global = true, value_name = "W")]
    window: Option<usize>,

    /// Recommendation list lengths, comma-separated.
    #[arg(long, global = true, value_name = "N[,N...]")]
    topn: Option<String>,

    /// Ranking mode: relevance_only, literal_diversity, or mmr_greedy.
    #[arg(long, global = true, value_name = "MODE")]
    mode: Option<String>,

    /// Diversity trade-off: "adaptive" or a fixed value in [0,1].
    #[arg(long, global = true, value_name = "A")]
    alpha: Option<String>,

    /// Hyperedge families to leave out of the graph, e.g. e2,e4.
    #[arg(long, global = true, value_name = "E[,E...]")]
    disable_edges: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset into the artifact directory.
    Synth {
        /// Number of users.
        #[arg(long)]
        users: Option<usize>,
        /// Number of tracks.
        #[arg(long)]
        tracks: Option<usize>,
        /// Number of artists.
        #[arg(long)]
        artists: Option<usize>,
        /// Number of albums.
        #[arg(long)]
        albums: Option<usize>,
        /// Number of distinct tags.
        #[arg(long)]
        tags: Option<usize>,
    },
    /// Build the weighted hypergraph from the dataset files.
    BuildGraph,
    /// Generate the random-walk corpus from the stored graph.
    Walk,
    /// Train skip-gram embeddings on the stored corpus.
    Train,
    /// Write top-n lists for every known user from the stored embeddings.
    Recommend,
    /// Run the cross-validated evaluation protocol end to end.
    Evaluate,
    /// Re-run evaluation with each optional edge family removed.
    Ablate,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; anything else is a
            // validation failure per the exit-code contract.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(inner) = source {
            eprintln!("  caused by: {inner}");
            source = inner.source();
        }
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    let (settings, cmd) = resolve(cli)?;
    fs::create_dir_all(&settings.out).map_err(|e| Error::io(&settings.out, e))?;
    match cmd {
        Cmd::Synth { users, tracks, artists, albums, tags } => {
            let mut shape = settings.synth.clone();
            shape.users = users.unwrap_or(shape.users);
            shape.tracks = tracks.unwrap_or(shape.tracks);
            shape.artists = artists.unwrap_or(shape.artists);
            shape.albums = albums.unwrap_or(shape.albums);
            shape.tags = tags.unwrap_or(shape.tags);
            cmd_synth(&settings, &shape)
        }
        Cmd::BuildGraph => cmd_build_graph(&settings),
        Cmd::Walk => cmd_walk(&settings),
        Cmd::Train => cmd_train(&settings),
        Cmd::Recommend => cmd_recommend(&settings),
        Cmd::Evaluate => cmd_evaluate(&settings),
        Cmd::Ablate => cmd_ablate(&settings),
    }
}

/// Defaults ← config file ← flags (with HYPERREC_THREADS as the --threads
/// fallback), then global thread caps and a final validation pass.
fn resolve(cli: Cli) -> Result<(Settings, Cmd)> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        apply_file(&mut s, path)?;
    }
    if let Some(out) = cli.out {
        s.out = out;
    }
    if let Some(seed) = cli.seed {
        s.set_seed(seed);
    }
    match cli.threads {
        Some(t) => s.threads = t,
        None => {
            if let Ok(v) = std::env::var("HYPERREC_THREADS") {
                s.threads = v.parse().map_err(|_| {
                    Error::validation(format!("HYPERREC_THREADS={v:?} is not a thread count"))
                })?;
            }
        }
    }
    let p = &mut s.pipeline;
    if let Some(v) = cli.iterations {
        p.walk.iterations = v;
    }
    if let Some(v) = cli.walk_length {
        p.walk.length = v;
    }
    if let Some(v) = cli.stay_prob {
        p.walk.stay_probability = v;
    }
    if let Some(v) = cli.dim {
        p.embedding.dim = v;
    }
    if let Some(v) = cli.window {
        p.embedding.window = v;
    }
    if let Some(list) = &cli.topn {
        p.ns = list
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::validation(format!("--topn: bad list length {part:?}")))
            })
            .collect::<Result<_>>()?;
    }
    if let Some(m) = &cli.mode {
        p.mode = m.parse()?;
    }
    if let Some(a) = &cli.alpha {
        p.alpha_mode = a.parse()?;
    }
    if let Some(e) = &cli.disable_edges {
        for kind in parse_disabled_edges(e)? {
            p.edge_kinds = p.edge_kinds.without(kind);
        }
    }
    if s.threads > 0 {
        p.embedding.workers = p.embedding.workers.min(s.threads);
    }
    configure_threads(s.threads);
    s.pipeline.validate()?;
    Ok((s, cli.cmd))
}

// ---- artifact plumbing --------------------------------------------------

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn load_dataset(s: &Settings) -> Result<(InteractionTable, Catalog, TagTable)> {
    let inter = InteractionTable::parse(s.interactions_path())?;
    let catalog = Catalog::parse(s.catalog_path())?;
    let tags = TagTable::parse(s.tags_path())?;
    Ok((inter, catalog, tags))
}

fn load_graph(s: &Settings) -> Result<Hypergraph> {
    let path = s.out.join("graph.bin");
    let mut r = open(&path)?;
    Hypergraph::load_from(&mut r, &path.display().to_string())
}

// ---- stages -------------------------------------------------------------

fn cmd_synth(s: &Settings, shape: &SynthShape) -> Result<()> {
    let (inter, catalog, tags) = generate_synthetic(
        shape.users,
        shape.tracks,
        shape.artists,
        shape.albums,
        shape.tags,
        s.pipeline.seed,
    )?;

    let path = s.interactions_path();
    let mut w = create(&path)?;
    for r in inter.rows() {
        writeln!(w, "{}\t{}\t{}", r.user, r.track, r.count).map_err(|e| Error::io(&path, e))?;
    }
    finish(w, &path)?;

    let path = s.catalog_path();
    let mut w = create(&path)?;
    for e in catalog.entries() {
        writeln!(w, "{}\t{}\t{}", e.track, e.artist, e.album.as_deref().unwrap_or(""))
            .map_err(|e| Error::io(&path, e))?;
    }
    finish(w, &path)?;

    let path = s.tags_path();
    let mut w = create(&path)?;
    for r in tags.rows() {
        writeln!(w, "{}\t{}\t{}", r.track, r.tag, r.count).map_err(|e| Error::io(&path, e))?;
    }
    finish(w, &path)?;

    println!(
        "synthesized {} listening rows over {} users / {} tracks into {}",
        inter.rows().len(),
        inter.user_count(),
        shape.tracks,
        s.out.display()
    );
    Ok(())
}

fn cmd_build_graph(s: &Settings) -> Result<()> {
    let (inter, catalog, tags) = load_dataset(s)?;
    let filtered = filter_top_k_per_user(&inter, s.pipeline.top_k_filter);
    let graph = Hypergraph::build(&filtered, &catalog, &tags, s.pipeline.edge_kinds)?;

    let path = s.out.join("graph.bin");
    let mut w = create(&path)?;
    graph.save_to(&mut w).map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;

    // Human-greppable edge dump alongside the binary artifact.
    let path = s.out.join("edges.jsonl");
    let mut w = create(&path)?;
    for e in graph.edges() {
        let members: Vec<serde_json::Value> = e
            .members
            .iter()
            .map(|&(v, weight)| {
                serde_json::json!({ "key": graph.vertices()[v].key, "weight": weight })
            })
            .collect();
        let line = serde_json::json!({
            "kind": e.kind.code(),
            "hub": graph.vertices()[e.hub].key,
            "members": members,
        });
        writeln!(w, "{line}").map_err(|e| Error::io(&path, e))?;
    }
    finish(w, &path)?;

    println!(
        "graph: {} vertices, {} hyperedges, fingerprint {:016x}",
        graph.vertices().len(),
        graph.edges().len(),
        graph.fingerprint()
    );
    Ok(())
}

fn cmd_walk(s: &Settings) -> Result<()> {
    let graph = load_graph(s)?;
    let corpus = generate_walks(&graph, &s.pipeline.walk)?;
    let path = s.out.join("walks.txt");
    let mut w = create(&path)?;
    corpus.save_to(&mut w).map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;
    println!(
        "corpus: {} walks of length {} (graph {:016x})",
        corpus.walks.len(),
        s.pipeline.walk.length,
        corpus.graph_fingerprint
    );
    Ok(())
}

fn cmd_train(s: &Settings) -> Result<()> {
    let graph = load_graph(s)?;
    let path = s.out.join("walks.txt");
    let corpus = WalkCorpus::load_from(open(&path)?, &path.display().to_string())?;
    let (table, stats) = train_skipgram(&corpus, &graph, &s.pipeline.embedding)?;

    let path = s.out.join("embeddings.bin");
    let mut w = create(&path)?;
    table.save_to(&mut w).map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;
    println!(
        "embeddings: {} vertices x dim {}; epoch loss {:.4} -> {:.4}",
        table.len(),
        table.dim(),
        stats.epoch_loss.first().copied().unwrap_or(f64::NAN),
        stats.epoch_loss.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_recommend(s: &Settings) -> Result<()> {
    let graph = load_graph(s)?;
    let path = s.out.join("embeddings.bin");
    let mut r = open(&path)?;
    let table = EmbeddingTable::load_from(&mut r, &path.display().to_string())?;
    table.verify_graph(&graph)?;

    let (inter, _, _) = load_dataset(s)?;
    let filtered = filter_top_k_per_user(&inter, s.pipeline.top_k_filter);
    let candidates = candidate_tracks(&graph);
    let cfg = s.pipeline.ranker_config(s.pipeline.max_n());

    let mut lists = Vec::new();
    for v in &graph.vertices()[graph.kind_block(VertexKind::User)] {
        let user = v.key.as_str();
        let exclusions = filtered
            .rows()
            .iter()
            .filter(|r| r.user == user)
            .map(|r| r.track.clone())
            .collect();
        lists.push(hyperrec_core::ranker::recommend(
            &table,
            user,
            &candidates,
            &exclusions,
            &cfg,
        )?);
    }
    let path = s.out.join("recommendations.tsv");
    let mut w = create(&path)?;
    write_recommendations(&lists, &mut w).map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;
    println!(
        "recommendations: {} users x top-{} ({})",
        lists.len(),
        cfg.n,
        s.pipeline.mode
    );
    Ok(())
}

fn cmd_evaluate(s: &Settings) -> Result<()> {
    let (inter, catalog, tags) = load_dataset(s)?;
    let report = pipeline::evaluate(&inter, &catalog, &tags, &s.pipeline)?;

    let path = s.out.join("metrics.csv");
    let mut w = create(&path)?;
    report.write_csv(&mut w).map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;
    let path = s.out.join("metrics.json");
    let mut w = create(&path)?;
    report.write_json(&mut w).map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;

    let n = *s.pipeline.ns.iter().find(|&&n| n == 20).unwrap_or(&s.pipeline.ns[0]);
    let mut headline = Vec::new();
    for metric in hyperrec_core::eval::Metric::ALL {
        if let Some(v) = report.mean(metric, n) {
            headline.push(format!("{metric}@{n} {v:.4}"));
        }
    }
    println!(
        "evaluated {} folds at n in {:?}: {}",
        report.folds,
        report.ns,
        headline.join(", ")
    );
    Ok(())
}

fn cmd_ablate(s: &Settings) -> Result<()> {
    let (inter, catalog, tags) = load_dataset(s)?;
    let rows = pipeline::ablate(&inter, &catalog, &tags, &s.pipeline)?;
    let path = s.out.join("ablation.csv");
    let mut w = create(&path)?;
    pipeline::write_ablation(&rows, &mut w).map_err(|e| Error::io(&path, e))?;
    finish(w, &path)?;
    let labels: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
    println!("ablation over {} variants: {}", rows.len(), labels.join(", "));
    Ok(())
}
