//! Resolved run settings: library defaults, overlaid by an optional flat
//! `key=value` config file, overlaid by command-line flags (handled in
//! `main`). Unknown keys are rejected by name so typos fail loudly instead
//! of silently running with defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hyperrec_core::hypergraph::EdgeKind;
use hyperrec_core::pipeline::PipelineConfig;
use hyperrec_core::{Error, Result};

/// Synthetic dataset shape for the `synth` subcommand.
#[derive(Debug, Clone)]
pub struct SynthShape {
    pub users: usize,
    pub tracks: usize,
    pub artists: usize,
    pub albums: usize,
    pub tags: usize,
}

impl Default for SynthShape {
    fn default() -> Self {
        SynthShape { users: 50, tracks: 500, artists: 40, albums: 60, tags: 30 }
    }
}

/// Everything a subcommand needs: artifact locations, dataset paths,
/// threading cap, synthesis shape, and the pipeline configuration proper.
#[derive(Debug, Clone)]
pub struct Settings {
    pub out: PathBuf,
    pub interactions: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub tags: Option<PathBuf>,
    /// 0 = library default (all cores). Caps rayon and embedding workers.
    pub threads: usize,
    pub synth: SynthShape,
    pub pipeline: PipelineConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            out: PathBuf::from("hyperrec-out"),
            interactions: None,
            catalog: None,
            tags: None,
            threads: 0,
            synth: SynthShape::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl Settings {
    /// Dataset file locations, defaulting to the artifact directory.
    pub fn interactions_path(&self) -> PathBuf {
        self.interactions.clone().unwrap_or_else(|| self.out.join("interactions.tsv"))
    }

    pub fn catalog_path(&self) -> PathBuf {
        self.catalog.clone().unwrap_or_else(|| self.out.join("catalog.tsv"))
    }

    pub fn tags_path(&self) -> PathBuf {
        self.tags.clone().unwrap_or_else(|| self.out.join("tags.tsv"))
    }

    /// One seed steers every stage: the fold protocol derives per-fold
    /// streams from it, and the staged single-run commands reuse it for
    /// walking and training directly.
    pub fn set_seed(&mut self, seed: u64) {
        self.pipeline.seed = seed;
        self.pipeline.walk.seed = seed;
        self.pipeline.embedding.seed = seed;
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| {
        Error::validation(format!("config line {line}: key `{key}`: bad value {value:?}: {e}"))
    })
}

/// Comma-separated list, e.g. `rank.n = 10,20,50`.
fn parse_list<T: FromStr>(key: &str, value: &str, line: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|part| parse_value(key, part.trim(), line)).collect()
}

/// Edge families to disable, e.g. `e2,e4`. `e1` is load-bearing and cannot
/// be switched off.
pub fn parse_disabled_edges(value: &str) -> Result<Vec<EdgeKind>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|code| {
            let kind: EdgeKind = code
                .parse()
                .map_err(|_| Error::validation(format!("unknown edge family {code:?}")))?;
            if kind == EdgeKind::UserTrack {
                return Err(Error::validation(
                    "the user-track family (e1) is mandatory and cannot be disabled",
                ));
            }
            Ok(kind)
        })
        .collect()
}

/// Apply one `key = value` pair onto the settings. Shared by the file loader
/// and (for a handful of keys) flag handling in `main`.
fn apply_pair(s: &mut Settings, key: &str, value: &str, line: usize) -> Result<()> {
    let p = &mut s.pipeline;
    match key {
        "out" => s.out = PathBuf::from(value),
        "data.interactions" => s.interactions = Some(PathBuf::from(value)),
        "data.catalog" => s.catalog = Some(PathBuf::from(value)),
        "data.tags" => s.tags = Some(PathBuf::from(value)),
        "threads" => s.threads = parse_value(key, value, line)?,
        "seed" => {
            let seed = parse_value(key, value, line)?;
            s.set_seed(seed);
        }
        "top_k" => p.top_k_filter = parse_value(key, value, line)?,
        "train_ratio" => p.train_ratio = parse_value(key, value, line)?,
        "folds" => p.folds = parse_value(key, value, line)?,
        "walk.iterations" => p.walk.iterations = parse_value(key, value, line)?,
        "walk.length" => p.walk.length = parse_value(key, value, line)?,
        "walk.stay" => p.walk.stay_probability = parse_value(key, value, line)?,
        "embedding.dim" => p.embedding.dim = parse_value(key, value, line)?,
        "embedding.window" => p.embedding.window = parse_value(key, value, line)?,
        "embedding.negatives" => p.embedding.negatives = parse_value(key, value, line)?,
        "embedding.epochs" => p.embedding.epochs = parse_value(key, value, line)?,
        "embedding.learning_rate" => {
            p.embedding.initial_learning_rate = parse_value(key, value, line)?
        }
        "embedding.workers" => p.embedding.workers = parse_value(key, value, line)?,
        "rank.n" => p.ns = parse_list(key, value, line)?,
        "rank.mode" => p.mode = parse_value(key, value, line)?,
        "rank.alpha" => p.alpha_mode = parse_value(key, value, line)?,
        "rank.similarity" => p.similarity = parse_value(key, value, line)?,
        "edges.disable" => {
            for kind in parse_disabled_edges(value)? {
                p.edge_kinds = p.edge_kinds.without(kind);
            }
        }
        "synth.users" => s.synth.users = parse_value(key, value, line)?,
        "synth.tracks" => s.synth.tracks = parse_value(key, value, line)?,
        "synth.artists" => s.synth.artists = parse_value(key, value, line)?,
        "synth.albums" => s.synth.albums = parse_value(key, value, line)?,
        "synth.tags" => s.synth.tags = parse_value(key, value, line)?,
        other => {
            return Err(Error::validation(format!(
                "config line {line}: unknown key `{other}`"
            )))
        }
    }
    Ok(())
}

/// Overlay a config file onto `s`. Later lines win over earlier ones;
/// `#` starts a comment; blank lines are ignored.
pub fn apply_file(s: &mut Settings, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| {
            Error::validation(format!(
                "config line {line}: expected `key = value`, got {stripped:?}"
            ))
        })?;
        apply_pair(s, key.trim(), value.trim(), line)
            .map_err(|e| e.context(format!("{}", path.display())))?;
    }
    Ok(())
}
