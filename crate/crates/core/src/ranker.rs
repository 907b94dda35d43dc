//! Top-n track recommendation from trained vertex vectors.
//!
//! Three ranking modes share one scoring core:
//!
//! * `relevance_only` — tracks ordered by user–track relevance.
//! * `literal_diversity` — per-position rescoring by the diversity degree
//!   `alpha * (1 - rel)`. For any fixed per-position weight this is a strictly
//!   decreasing function of relevance, so it reproduces the relevance order;
//!   the mode exists because that rank-invariance is itself a documented,
//!   tested property.
//! * `mmr_greedy` — greedy marginal-relevance selection: each position trades
//!   relevance against the maximum cosine similarity to the tracks already
//!   chosen, with a position-adaptive weight that shifts from relevance toward
//!   diversity as the list grows.
//!
//! A play-count popularity baseline is included for comparison runs.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::dataset::InteractionTable;
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::hypergraph::VertexKind;

/// How user–track relevance is computed from the two vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Similarity {
    /// Raw inner product.
    Dot,
    /// Inner product of unit-normalized vectors; a zero vector scores 0.
    Cosine,
}

impl FromStr for Similarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(Similarity::Dot),
            "cosine" => Ok(Similarity::Cosine),
            other => Err(Error::Validation(format!(
                "unknown similarity '{other}' (expected 'dot' or 'cosine')"
            ))),
        }
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Similarity::Dot => "dot",
            Similarity::Cosine => "cosine",
        })
    }
}

/// List-construction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    RelevanceOnly,
    LiteralDiversity,
    MmrGreedy,
}

impl FromStr for RankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relevance_only" => Ok(RankMode::RelevanceOnly),
            "literal_diversity" => Ok(RankMode::LiteralDiversity),
            "mmr_greedy" => Ok(RankMode::MmrGreedy),
            other => Err(Error::Validation(format!(
                "unknown rank mode '{other}' (expected 'relevance_only', \
                 'literal_diversity', or 'mmr_greedy')"
            ))),
        }
    }
}

impl fmt::Display for RankMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankMode::RelevanceOnly => "relevance_only",
            RankMode::LiteralDiversity => "literal_diversity",
            RankMode::MmrGreedy => "mmr_greedy",
        })
    }
}

/// Per-position diversity weight: a constant, or the schedule
/// `alpha_i = 1 - 1/(i+1)` that starts balanced and tends to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    Fixed(f64),
    Adaptive,
}

impl AlphaMode {
    /// The weight used at 1-based position `i`.
    pub fn at(&self, i: usize) -> f64 {
        match self {
            AlphaMode::Fixed(a) => *a,
            AlphaMode::Adaptive => adaptive_alpha(i),
        }
    }
}

impl FromStr for AlphaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "adaptive" {
            return Ok(AlphaMode::Adaptive);
        }
        let a: f64 = s.parse().map_err(|_| {
            Error::Validation(format!(
                "alpha must be 'adaptive' or a number in [0,1], got '{s}'"
            ))
        })?;
        if !a.is_finite() || !(0.0..=1.0).contains(&a) {
            return Err(Error::Validation(format!(
                "fixed alpha must lie in [0,1], got {a}"
            )));
        }
        Ok(AlphaMode::Fixed(a))
    }
}

impl fmt::Display for AlphaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaMode::Fixed(a) => write!(f, "{a}"),
            AlphaMode::Adaptive => f.write_str("adaptive"),
        }
    }
}

/// Settings for one recommendation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RankerConfig {
    /// Maximum list length.
    pub n: usize,
    pub mode: RankMode,
    pub alpha_mode: AlphaMode,
    pub similarity: Similarity,
}

impl Default for RankerConfig {
    fn default() -> Self {
        RankerConfig {
            n: 10,
            mode: RankMode::MmrGreedy,
            alpha_mode: AlphaMode::Adaptive,
            similarity: Similarity::Dot,
        }
    }
}

impl RankerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation("list length n must be at least 1".into()));
        }
        if let AlphaMode::Fixed(a) = self.alpha_mode {
            if !a.is_finite() || !(0.0..=1.0).contains(&a) {
                return Err(Error::Validation(format!(
                    "fixed alpha must lie in [0,1], got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// One slot of a recommendation list.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedItem {
    pub track: String,
    /// User–track relevance of this track (not the selection objective).
    pub relevance: f64,
    /// 1-based rank.
    pub position: usize,
}

/// An ordered top-n list for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub user: String,
    pub items: Vec<RankedItem>,
    /// Which strategy produced the list (a `RankMode` name, or
    /// "popularity_baseline").
    pub mode: String,
}

impl RecommendationList {
    pub fn tracks(&self) -> Vec<&str> {
        self.items.iter().map(|it| it.track.as_str()).collect()
    }
}

/// User–track relevance score.
///
/// `Dot` is the raw inner product; `Cosine` normalizes both vectors first and
/// scores 0 (with a warning) if either has zero length.
pub fn relevance(user: &[f64], track: &[f64], similarity: Similarity) -> f64 {
    assert_eq!(user.len(), track.len(), "vector dimensions differ");
    match similarity {
        Similarity::Dot => dot(user, track),
        Similarity::Cosine => cosine(user, track),
    }
}

/// Diversity degree of a track for a user: `alpha * (1 - rel)`. Higher means
/// the track is further from what the user's vector already points at.
pub fn diversity_degree(rel: f64, alpha: f64) -> f64 {
    alpha * (1.0 - rel)
}

/// Position-adaptive diversity weight `1 - 1/(i+1)` for 1-based position `i`:
/// 0.5 at the top slot, monotonically approaching 1 down the list.
pub fn adaptive_alpha(i: usize) -> f64 {
    assert!(i >= 1, "positions are 1-based");
    1.0 - 1.0 / (i as f64 + 1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity; zero-length input scores 0 with a warning, so a track
/// whose vector never trained cannot dominate or poison a ranking.
fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        log::warn!("cosine of a zero vector; scoring 0");
        return 0.0;
    }
    dot(a, b) / (na * nb)
}

/// A candidate row with its precomputed relevance.
struct Scored {
    row: usize,
    key_order: usize,
    rel: f64,
}

/// Produce a top-n list for `user` over `candidates` minus `exclusions`.
///
/// Preconditions: the user and every non-excluded candidate must have a
/// vector in `table` (a user without one is a cold user), and at least one
/// candidate must survive the exclusions. Ties at every selection point break
/// by ascending track id.
pub fn recommend(
    table: &EmbeddingTable,
    user: &str,
    candidates: &BTreeSet<String>,
    exclusions: &BTreeSet<String>,
    cfg: &RankerConfig,
) -> Result<RecommendationList> {
    cfg.validate()?;
    let user_row = table.index_of(VertexKind::User, user).ok_or_else(|| {
        Error::Lookup(format!(
            "user '{user}' has no vector (cold user: absent from the training split)"
        ))
    })?;
    // BTreeSet iteration is ascending, so candidate order = ascending track
    // id; every later tie-break relies on this.
    let mut rows = Vec::with_capacity(candidates.len());
    for key in candidates {
        if exclusions.contains(key) {
            continue;
        }
        let row = table.index_of(VertexKind::Track, key).ok_or_else(|| {
            Error::Lookup(format!("candidate track '{key}' has no vector"))
        })?;
        rows.push((key.as_str(), row));
    }
    if rows.is_empty() {
        return Err(Error::Validation(format!(
            "no candidates remain for user '{user}' after exclusions"
        )));
    }

    let user_vec = table.vector(user_row);
    let scored: Vec<Scored> = rows
        .iter()
        .enumerate()
        .map(|(k, (_, row))| Scored {
            row: *row,
            key_order: k,
            rel: relevance(user_vec, table.vector(*row), cfg.similarity),
        })
        .collect();

    let order = match cfg.mode {
        RankMode::RelevanceOnly => rank_by_relevance(&scored, cfg.n),
        RankMode::LiteralDiversity => rank_by_diversity_degree(&scored, cfg),
        RankMode::MmrGreedy => rank_by_marginal_relevance(&scored, table, cfg),
    };

    let items = order
        .into_iter()
        .enumerate()
        .map(|(p, k)| RankedItem {
            track: rows[scored[k].key_order].0.to_string(),
            relevance: scored[k].rel,
            position: p + 1,
        })
        .collect();
    Ok(RecommendationList {
        user: user.to_string(),
        items,
        mode: cfg.mode.to_string(),
    })
}

/// Descending relevance; the sort is stable over ascending-id input, so ties
/// keep ascending id.
fn rank_by_relevance(scored: &[Scored], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scored.len()).collect();
    idx.sort_by(|&a, &b| {
        scored[b]
            .rel
            .partial_cmp(&scored[a].rel)
            .expect("relevance scores are finite")
    });
    idx.truncate(n);
    idx
}

/// Position-by-position selection of the minimum diversity degree
/// `alpha_i * (1 - rel)`, evaluated verbatim at each slot. For any one slot
/// the weight is shared by all candidates, so this recovers the relevance
/// order; see the module docs.
fn rank_by_diversity_degree(scored: &[Scored], cfg: &RankerConfig) -> Vec<usize> {
    let len = cfg.n.min(scored.len());
    let mut picked = vec![false; scored.len()];
    let mut order = Vec::with_capacity(len);
    for i in 1..=len {
        let alpha = cfg.alpha_mode.at(i);
        let mut best: Option<(usize, f64)> = None;
        for (k, s) in scored.iter().enumerate() {
            if picked[k] {
                continue;
            }
            let d = diversity_degree(s.rel, alpha);
            // Strict less-than keeps the earliest (lowest track id) on ties.
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        let (k, _) = best.expect("len <= unpicked candidates");
        picked[k] = true;
        order.push(k);
    }
    order
}

/// Greedy marginal relevance: slot 1 takes the most relevant track; slot i
/// maximizes `(1-alpha_i)*rel - alpha_i*max_sim`, where `max_sim` is the
/// track's highest cosine similarity to any already-picked track.
fn rank_by_marginal_relevance(
    scored: &[Scored],
    table: &EmbeddingTable,
    cfg: &RankerConfig,
) -> Vec<usize> {
    let len = cfg.n.min(scored.len());
    let mut picked = vec![false; scored.len()];
    let mut max_sim = vec![f64::NEG_INFINITY; scored.len()];
    let mut order = Vec::with_capacity(len);
    for i in 1..=len {
        let mut best: Option<(usize, f64)> = None;
        for (k, s) in scored.iter().enumerate() {
            if picked[k] {
                continue;
            }
            let objective = if i == 1 {
                s.rel
            } else {
                let alpha = cfg.alpha_mode.at(i);
                (1.0 - alpha) * s.rel - alpha * max_sim[k]
            };
            // Strict greater-than keeps the earliest (lowest track id) on ties.
            if best.is_none_or(|(_, bo)| objective > bo) {
                best = Some((k, objective));
            }
        }
        let (k, _) = best.expect("len <= unpicked candidates");
        picked[k] = true;
        order.push(k);
        if order.len() == len {
            break;
        }
        let picked_vec = table.vector(scored[k].row);
        for (j, s) in scored.iter().enumerate() {
            if !picked[j] {
                let sim = cosine(table.vector(s.row), picked_vec);
                if sim > max_sim[j] {
                    max_sim[j] = sim;
                }
            }
        }
    }
    order
}

/// Global play-count ranking over the training interactions: descending
/// summed count, ties by ascending track id.
pub fn popularity_ranking(train: &InteractionTable) -> Vec<(String, u64)> {
    let mut counts: std::collections::BTreeMap<&str, u64> = std::collections::BTreeMap::new();
    for r in train.rows() {
        *counts.entry(r.track.as_str()).or_insert(0) += r.count;
    }
    let mut ranked: Vec<(String, u64)> = counts
        .into_iter()
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    // Stable sort over ascending-id input keeps ascending id on count ties.
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    ranked
}

/// Popularity baseline: every training user receives the globally most played
/// tracks, minus the tracks they already played, truncated to `n`. The listed
/// score is the global play count.
pub fn popularity_baseline(train: &InteractionTable, n: usize) -> Result<Vec<RecommendationList>> {
    if train.rows().is_empty() {
        return Err(Error::Validation(
            "popularity baseline needs a nonempty training table".into(),
        ));
    }
    let ranked = popularity_ranking(train);
    let mut lists = Vec::new();
    for (user, rows) in train.by_user() {
        let seen: BTreeSet<&str> = rows.iter().map(|r| r.track.as_str()).collect();
        let items = ranked
            .iter()
            .filter(|(t, _)| !seen.contains(t.as_str()))
            .take(n)
            .enumerate()
            .map(|(p, (t, c))| RankedItem {
                track: t.clone(),
                relevance: *c as f64,
                position: p + 1,
            })
            .collect();
        lists.push(RecommendationList {
            user: user.to_string(),
            items,
            mode: "popularity_baseline".to_string(),
        });
    }
    Ok(lists)
}

/// Write lists as `user_id<TAB>rank<TAB>track_id<TAB>score` rows.
pub fn write_recommendations<W: Write>(lists: &[RecommendationList], w: &mut W) -> std::io::Result<()> {
    for list in lists {
        for item in &list.items {
            writeln!(w, "{}\t{}\t{}\t{}", list.user, item.position, item.track, item.relevance)?;
        }
    }
    Ok(())
}
