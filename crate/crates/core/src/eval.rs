//! Ranking quality and aggregate diversity metrics over the k-fold protocol.
//!
//! Four accuracy metrics (Recall, Hit Ratio, MAP, NDCG, all @n with binary
//! relevance) plus an aggregate tag-diversity score that credits a list for
//! covering many tags with probability mass spread down the ranking. Per-user
//! values are averaged to fold values, fold values to the reported means.
//!
//! Everything here accumulates in deterministic order (sorted maps, fixed
//! metric order), so a repeated evaluation writes byte-identical reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::dataset::TagTable;
use crate::error::{Error, Result};
use crate::ranker::RecommendationList;

/// The five reported metrics, in canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Recall,
    HitRatio,
    Map,
    Ndcg,
    AggrDiv,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Recall,
        Metric::HitRatio,
        Metric::Map,
        Metric::Ndcg,
        Metric::AggrDiv,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Recall => "recall",
            Metric::HitRatio => "hit_ratio",
            Metric::Map => "map",
            Metric::Ndcg => "ndcg",
            Metric::AggrDiv => "aggr_div",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown metric '{s}'")))
    }
}

/// Fraction of the relevant set found in the top n; 0 for an empty relevant
/// set (such users are skipped upstream, but the value is still defined).
pub fn recall_at_n<S: AsRef<str>>(recommended: &[S], relevant: &BTreeSet<String>, n: usize) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    if relevant.is_empty() {
        return 0.0;
    }
    let hits = recommended
        .iter()
        .take(n)
        .filter(|t| relevant.contains(t.as_ref()))
        .count();
    hits as f64 / relevant.len() as f64
}

/// 1 if any relevant track appears in the top n, else 0. Averaging the
/// per-user values yields the dataset-level hit ratio.
pub fn hit_ratio_at_n<S: AsRef<str>>(
    recommended: &[S],
    relevant: &BTreeSet<String>,
    n: usize,
) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    let hit = recommended
        .iter()
        .take(n)
        .any(|t| relevant.contains(t.as_ref()));
    if hit {
        1.0
    } else {
        0.0
    }
}

/// Truncated mean average precision: the mean of precision@p over hit
/// positions p ≤ n, normalized by min(|relevant|, n) so a perfect prefix
/// scores 1.
pub fn map_at_n<S: AsRef<str>>(recommended: &[S], relevant: &BTreeSet<String>, n: usize) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    if relevant.is_empty() {
        return 0.0;
    }
    let mut hits = 0u64;
    let mut sum = 0.0;
    for (i, t) in recommended.iter().take(n).enumerate() {
        if relevant.contains(t.as_ref()) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / relevant.len().min(n) as f64
}

/// NDCG with binary gains and a log2(position+1) discount, normalized by the
/// ideal ordering of all |relevant| items. The normalizer does not shrink
/// with n, which keeps the value nondecreasing as the list grows and equal to
/// 1 exactly when every relevant item sits at the top and fits.
pub fn ndcg_at_n<S: AsRef<str>>(recommended: &[S], relevant: &BTreeSet<String>, n: usize) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    if relevant.is_empty() {
        return 0.0;
    }
    let mut dcg = 0.0;
    for (i, t) in recommended.iter().take(n).enumerate() {
        if relevant.contains(t.as_ref()) {
            dcg += 1.0 / ((i + 2) as f64).log2();
        }
    }
    let idcg: f64 = (0..relevant.len()).map(|i| 1.0 / ((i + 2) as f64).log2()).sum();
    dcg / idcg
}

/// Aggregate tag diversity of the top n of a list.
///
/// Per listed track, each of its tags receives probability mass
/// `q = count / (track's total tag count)` discounted by `1/log2(1+j)`,
/// where `j` counts, in list order, how many listed tracks carrying that tag
/// have appeared so far (1-based, so a tag's first appearance is undiscounted).
/// Summing per tag gives `p(ta)`; `D(ta)` is the number of listed tracks
/// carrying the tag. The score is the D-weighted mean of p: Σ p·D / Σ D.
/// Untagged tracks contribute nothing; a list with no tagged track scores 0.
pub fn aggr_div_at_n(list: &RecommendationList, tags: &TagTable, n: usize) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    // Per tag: occurrences so far (doubles as D and as the next j), and the
    // accumulated discounted probability p. BTreeMap keeps summation order
    // independent of input order.
    let mut per_tag: BTreeMap<&str, (u64, f64)> = BTreeMap::new();
    for item in list.items.iter().take(n) {
        let rows = tags.track_tags(&item.track);
        let total: u64 = rows.iter().map(|r| r.count).sum();
        if total == 0 {
            continue;
        }
        for r in rows {
            let entry = per_tag.entry(r.tag.as_str()).or_insert((0, 0.0));
            entry.0 += 1;
            let q = r.count as f64 / total as f64;
            entry.1 += q / (1.0 + entry.0 as f64).log2();
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (d, p) in per_tag.values() {
        num += p * *d as f64;
        den += *d as f64;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// One evaluated user: the produced list and the held-out tracks.
#[derive(Debug, Clone)]
pub struct UserOutcome {
    pub list: RecommendationList,
    pub relevant: BTreeSet<String>,
}

/// Per-(metric, n) means over users for a single fold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FoldMetrics {
    pub values: BTreeMap<(Metric, usize), f64>,
}

/// Average every metric over the users of one fold, at each list length in
/// `ns`. Users with an empty relevant set score 0 on the accuracy metrics by
/// definition; callers normally exclude them before recommending.
pub fn fold_metrics(outcomes: &[UserOutcome], tags: &TagTable, ns: &[usize]) -> Result<FoldMetrics> {
    if outcomes.is_empty() {
        return Err(Error::Validation("a fold must evaluate at least one user".into()));
    }
    validate_ns(ns)?;
    let mut values = BTreeMap::new();
    for &n in ns {
        let mut sums = [0.0f64; 5];
        for o in outcomes {
            let tracks = o.list.tracks();
            sums[0] += recall_at_n(&tracks, &o.relevant, n);
            sums[1] += hit_ratio_at_n(&tracks, &o.relevant, n);
            sums[2] += map_at_n(&tracks, &o.relevant, n);
            sums[3] += ndcg_at_n(&tracks, &o.relevant, n);
            sums[4] += aggr_div_at_n(&o.list, tags, n);
        }
        let m = outcomes.len() as f64;
        for (metric, sum) in Metric::ALL.into_iter().zip(sums) {
            values.insert((metric, n), sum / m);
        }
    }
    Ok(FoldMetrics { values })
}

/// Per-fold values plus cross-fold means for every (metric, n).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub ns: Vec<usize>,
    pub folds: usize,
    pub per_fold: Vec<FoldMetrics>,
    pub means: BTreeMap<(Metric, usize), f64>,
}

fn validate_ns(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::Validation("at least one list length n is required".into()));
    }
    if ns.iter().any(|&n| n == 0) {
        return Err(Error::Validation("list lengths must be at least 1".into()));
    }
    Ok(())
}

/// Run `run_fold` for each fold index and assemble the cross-fold report.
/// A fold failure aborts the whole evaluation, tagged with the fold index.
pub fn evaluate_folds<F>(folds: usize, ns: &[usize], mut run_fold: F) -> Result<MetricsReport>
where
    F: FnMut(usize) -> Result<FoldMetrics>,
{
    if folds == 0 {
        return Err(Error::Validation("fold count must be at least 1".into()));
    }
    validate_ns(ns)?;
    let mut per_fold = Vec::with_capacity(folds);
    for f in 0..folds {
        let fm = run_fold(f).map_err(|e| e.context(format!("fold {f}")))?;
        for &n in ns {
            for metric in Metric::ALL {
                if !fm.values.contains_key(&(metric, n)) {
                    return Err(Error::Internal(format!(
                        "fold {f} produced no value for {metric}@{n}"
                    )));
                }
            }
        }
        per_fold.push(fm);
    }
    let mut means = BTreeMap::new();
    for &n in ns {
        for metric in Metric::ALL {
            let sum: f64 = per_fold.iter().map(|fm| fm.values[&(metric, n)]).sum();
            means.insert((metric, n), sum / folds as f64);
        }
    }
    Ok(MetricsReport { ns: ns.to_vec(), folds, per_fold, means })
}

impl MetricsReport {
    pub fn mean(&self, metric: Metric, n: usize) -> Option<f64> {
        self.means.get(&(metric, n)).copied()
    }

    /// Long-format CSV: `metric,n,fold,value` with fold indices followed by a
    /// `mean` row, in fixed metric order. Deterministic byte-for-byte.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "metric,n,fold,value")?;
        for metric in Metric::ALL {
            for &n in &self.ns {
                for (f, fm) in self.per_fold.iter().enumerate() {
                    writeln!(w, "{metric},{n},{f},{}", fm.values[&(metric, n)])?;
                }
                writeln!(w, "{metric},{n},mean,{}", self.means[&(metric, n)])?;
            }
        }
        Ok(())
    }

    /// Long-format JSON: an array of `{metric, n, per_fold, mean}` records in
    /// the same fixed order as the CSV.
    pub fn write_json<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut records = Vec::new();
        for metric in Metric::ALL {
            for &n in &self.ns {
                let per_fold: Vec<f64> = self
                    .per_fold
                    .iter()
                    .map(|fm| fm.values[&(metric, n)])
                    .collect();
                records.push(serde_json::json!({
                    "metric": metric.name(),
                    "n": n,
                    "per_fold": per_fold,
                    "mean": self.means[&(metric, n)],
                }));
            }
        }
        let doc = serde_json::json!({
            "folds": self.folds,
            "ns": self.ns,
            "results": records,
        });
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)?;
        Ok(())
    }
}
