//! End-to-end orchestration: filter → split → graph → walks → embeddings →
//! recommendations → metrics, repeated over every fold of the evaluation
//! protocol, plus the edge-family ablation harness.
//!
//! The stages themselves live in their own modules; this module owns the
//! shared configuration, the per-fold seed derivation, and the protocol
//! plumbing that the CLI and the test suites drive.

use std::collections::BTreeSet;

use crate::dataset::{filter_top_k_per_user, split, Catalog, InteractionTable, SplitSpec, TagTable};
use crate::embedding::{train_skipgram, EmbeddingConfig, EmbeddingTable, TrainStats};
use crate::error::{Error, Result};
use crate::eval::{evaluate_folds, fold_metrics, FoldMetrics, MetricsReport, UserOutcome};
use crate::hypergraph::{EdgeKind, EdgeKindSet, Hypergraph, VertexKind};
use crate::ranker::{recommend, AlphaMode, RankMode, RankerConfig, Similarity};
use crate::rng::{derive, purpose};
use crate::walker::{generate_walks, WalkConfig, WalkCorpus};

/// Full pipeline settings. Component seeds inside `walk` and `embedding` are
/// ignored: each fold derives its own seeds from the top-level `seed` so that
/// folds are independent yet the whole run is a pure function of one number.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Keep each user's most-played tracks before anything else runs.
    pub top_k_filter: usize,
    pub train_ratio: f64,
    pub folds: usize,
    pub seed: u64,
    pub walk: WalkConfig,
    pub embedding: EmbeddingConfig,
    /// List lengths evaluated; recommendations are produced once at the
    /// maximum and scored on prefixes.
    pub ns: Vec<usize>,
    pub mode: RankMode,
    pub alpha_mode: AlphaMode,
    pub similarity: Similarity,
    pub edge_kinds: EdgeKindSet,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            top_k_filter: 200,
            train_ratio: 0.9,
            folds: 10,
            seed: 42,
            walk: WalkConfig::default(),
            embedding: EmbeddingConfig::default(),
            ns: (1..=10).map(|i| i * 10).collect(),
            mode: RankMode::MmrGreedy,
            alpha_mode: AlphaMode::Adaptive,
            similarity: Similarity::Dot,
            edge_kinds: EdgeKindSet::all(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k_filter == 0 {
            return Err(Error::Validation("top_k_filter must be at least 1".into()));
        }
        if self.folds == 0 {
            return Err(Error::Validation("fold count must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.train_ratio) || self.train_ratio <= 0.0 {
            return Err(Error::Validation(format!(
                "train_ratio must lie strictly between 0 and 1, got {}",
                self.train_ratio
            )));
        }
        if self.ns.is_empty() || self.ns.iter().any(|&n| n == 0) {
            return Err(Error::Validation(
                "evaluation list lengths must be nonempty and at least 1".into(),
            ));
        }
        self.walk.validate()?;
        self.embedding.validate()?;
        self.ranker_config(1).validate()?;
        Ok(())
    }

    /// Walk seed for one fold.
    pub fn walk_seed(&self, fold: usize) -> u64 {
        derive(self.seed, &[purpose::FOLD, fold as u64, purpose::WALK])
    }

    /// Embedding seed for one fold.
    pub fn train_seed(&self, fold: usize) -> u64 {
        derive(self.seed, &[purpose::FOLD, fold as u64, purpose::SGNS_INIT])
    }

    /// Ranker settings for one list length, inheriting mode and trade-off.
    pub fn ranker_config(&self, n: usize) -> RankerConfig {
        RankerConfig {
            n,
            mode: self.mode,
            alpha_mode: self.alpha_mode,
            similarity: self.similarity,
        }
    }

    /// Longest requested list; recommendations are built once at this length
    /// and shorter metrics read prefixes.
    pub fn max_n(&self) -> usize {
        self.ns.iter().copied().max().unwrap_or(1)
    }
}

/// Everything one fold produces before recommendation.
pub struct FoldArtifacts {
    pub train: InteractionTable,
    pub test: InteractionTable,
    pub graph: Hypergraph,
    pub corpus: WalkCorpus,
    pub embeddings: EmbeddingTable,
    pub stats: TrainStats,
}

/// Split one fold and run graph construction, walking, and training on its
/// training half. `filtered` must already be top-k filtered.
pub fn run_fold_stages(
    filtered: &InteractionTable,
    catalog: &Catalog,
    tags: &TagTable,
    cfg: &PipelineConfig,
    fold: usize,
) -> Result<FoldArtifacts> {
    cfg.validate()?;
    if fold >= cfg.folds {
        return Err(Error::Validation(format!(
            "fold index {fold} out of range for {} folds",
            cfg.folds
        )));
    }
    let spec = SplitSpec {
        train_ratio: cfg.train_ratio,
        fold_index: fold as u32,
        folds: cfg.folds as u32,
        seed: cfg.seed,
    };
    let (train, test) = split(filtered, &spec)?;
    let graph = Hypergraph::build(&train, catalog, tags, cfg.edge_kinds)?;
    let walk_cfg = WalkConfig { seed: cfg.walk_seed(fold), ..cfg.walk.clone() };
    let corpus = generate_walks(&graph, &walk_cfg)?;
    let train_cfg = EmbeddingConfig { seed: cfg.train_seed(fold), ..cfg.embedding.clone() };
    let (embeddings, stats) = train_skipgram(&corpus, &graph, &train_cfg)?;
    Ok(FoldArtifacts { train, test, graph, corpus, embeddings, stats })
}

/// All embedded tracks of a graph, i.e. the recommendation candidate pool.
pub fn candidate_tracks(graph: &Hypergraph) -> BTreeSet<String> {
    graph.vertices()[graph.kind_block(VertexKind::Track)]
        .iter()
        .map(|v| v.key.clone())
        .collect()
}

/// Produce one recommendation list per test user of the fold, paired with
/// that user's held-out tracks. Lists are built at the longest configured
/// length; metrics read prefixes.
pub fn recommend_fold(artifacts: &FoldArtifacts, cfg: &PipelineConfig) -> Result<Vec<UserOutcome>> {
    artifacts.embeddings.verify_graph(&artifacts.graph)?;
    let candidates = candidate_tracks(&artifacts.graph);
    let ranker_cfg = cfg.ranker_config(cfg.max_n());
    let mut outcomes = Vec::new();
    for (user, test_rows) in artifacts.test.by_user() {
        let exclusions: BTreeSet<String> = artifacts
            .train
            .rows()
            .iter()
            .filter(|r| r.user == user)
            .map(|r| r.track.clone())
            .collect();
        let list = recommend(&artifacts.embeddings, user, &candidates, &exclusions, &ranker_cfg)?;
        let relevant: BTreeSet<String> =
            test_rows.iter().map(|r| r.track.clone()).collect();
        outcomes.push(UserOutcome { list, relevant });
    }
    if outcomes.is_empty() {
        return Err(Error::Validation(
            "no test users to evaluate; the split produced an empty test set".into(),
        ));
    }
    Ok(outcomes)
}

/// Run the full k-fold protocol and return the aggregated report.
pub fn evaluate(
    interactions: &InteractionTable,
    catalog: &Catalog,
    tags: &TagTable,
    cfg: &PipelineConfig,
) -> Result<MetricsReport> {
    cfg.validate()?;
    let filtered = filter_top_k_per_user(interactions, cfg.top_k_filter);
    evaluate_folds(cfg.folds, &cfg.ns, |fold| {
        let artifacts = run_fold_stages(&filtered, catalog, tags, cfg, fold)?;
        let outcomes = recommend_fold(&artifacts, cfg)?;
        fold_metrics(&outcomes, tags, &cfg.ns)
    })
}

/// One ablation row: the configuration label and its evaluation report.
pub struct AblationRow {
    pub label: String,
    pub report: MetricsReport,
}

/// Evaluate the full graph and then each optional edge family removed in
/// turn. The mandatory user–track family cannot be ablated.
pub fn ablate(
    interactions: &InteractionTable,
    catalog: &Catalog,
    tags: &TagTable,
    cfg: &PipelineConfig,
) -> Result<Vec<AblationRow>> {
    let mut rows = vec![AblationRow {
        label: "full".to_string(),
        report: evaluate(interactions, catalog, tags, cfg)?,
    }];
    for kind in [EdgeKind::TagTrack, EdgeKind::AlbumTrack, EdgeKind::ArtistTrack] {
        let mut variant = cfg.clone();
        variant.edge_kinds = cfg.edge_kinds.without(kind);
        let label = format!("-{}", kind.code());
        let report = evaluate(interactions, catalog, tags, &variant)
            .map_err(|e| e.context(format!("ablation {label}")))?;
        rows.push(AblationRow { label, report });
    }
    Ok(rows)
}

/// Write ablation results as `variant,metric,n,value` rows (cross-fold means
/// only), in fixed variant order.
pub fn write_ablation<W: std::io::Write>(rows: &[AblationRow], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "variant,metric,n,value")?;
    for row in rows {
        for metric in crate::eval::Metric::ALL {
            for &n in &row.report.ns {
                writeln!(w, "{},{metric},{n},{}", row.label, row.report.means[&(metric, n)])?;
            }
        }
    }
    Ok(())
}

/// Convenience for tests and the CLI's staged flow: metrics for one fold.
pub fn run_single_fold(
    interactions: &InteractionTable,
    catalog: &Catalog,
    tags: &TagTable,
    cfg: &PipelineConfig,
    fold: usize,
) -> Result<FoldMetrics> {
    let filtered = filter_top_k_per_user(interactions, cfg.top_k_filter);
    let artifacts = run_fold_stages(&filtered, catalog, tags, cfg, fold)?;
    let outcomes = recommend_fold(&artifacts, cfg)?;
    fold_metrics(&outcomes, tags, &cfg.ns)
}
