//! Listening-event ingestion: the three input tables (interactions, catalog,
//! tags), the per-user top-k popularity filter, and the per-user train/test
//! split used by the fold protocol.
//!
//! All tables are plain 3-column TSV (UTF-8, LF). A header line is optional:
//! for count-bearing tables it is detected by a non-numeric third column; for
//! the catalog (whose third column is a free string) only the canonical
//! column names are recognized as a header.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{self, purpose};

/// One aggregated (user, track) listening count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub user: String,
    pub track: String,
    pub count: u64,
}

/// Aggregated listening events, rows sorted by (user, track).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InteractionTable {
    rows: Vec<Interaction>,
}

/// One catalog row; `album` is `None` when the source field was empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub track: String,
    pub artist: String,
    pub album: Option<String>,
}

/// Track → (artist, album) lookup; rows sorted by track, track unique.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

/// One aggregated (track, tag) annotation count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagRow {
    pub track: String,
    pub tag: String,
    pub count: u64,
}

/// Aggregated tag annotations, rows sorted by (track, tag).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TagTable {
    rows: Vec<TagRow>,
}

/// Parameters of one fold of the per-user hold-out protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_ratio: f64,
    pub fold_index: u32,
    pub folds: u32,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::validation(format!(
                "train_ratio must lie in (0,1), got {}",
                self.train_ratio
            )));
        }
        if self.folds == 0 {
            return Err(Error::validation("folds must be ≥ 1"));
        }
        if self.fold_index >= self.folds {
            return Err(Error::validation(format!(
                "fold_index {} out of range for {} folds",
                self.fold_index, self.folds
            )));
        }
        Ok(())
    }
}

fn key_ok(s: &str) -> bool {
    !s.is_empty() && !s.contains(['\t', '\n', '\r'])
}

fn split3<'l>(line: &'l str, path: &str, lineno: usize) -> Result<(&'l str, &'l str, &'l str)> {
    let mut it = line.split('\t');
    let a = it.next().unwrap_or("");
    let (b, c) = match (it.next(), it.next()) {
        (Some(b), Some(c)) => (b, c),
        _ => {
            return Err(Error::Parse {
                path: path.to_string(),
                line: lineno,
                msg: format!("expected 3 tab-separated fields, got {:?}", line),
            })
        }
    };
    if it.next().is_some() {
        return Err(Error::Parse {
            path: path.to_string(),
            line: lineno,
            msg: "more than 3 tab-separated fields".to_string(),
        });
    }
    Ok((a, b, c))
}

fn parse_count(s: &str, path: &str, lineno: usize) -> Result<u64> {
    let n: u64 = s.trim().parse().map_err(|_| Error::Parse {
        path: path.to_string(),
        line: lineno,
        msg: format!("third column {s:?} is not a nonnegative integer"),
    })?;
    if n == 0 {
        return Err(Error::Validation(format!(
            "{path}:{lineno}: count must be ≥ 1"
        )));
    }
    Ok(n)
}

fn check_key(s: &str, what: &str, path: &str, lineno: usize) -> Result<()> {
    if key_ok(s) {
        Ok(())
    } else {
        Err(Error::Parse {
            path: path.to_string(),
            line: lineno,
            msg: format!("bad {what} key {s:?} (empty or contains control characters)"),
        })
    }
}

/// Shared scaffolding for the two count-bearing tables: skips an optional
/// header (first line whose third column is non-numeric), aggregates
/// duplicate keys by summing, returns rows sorted by key.
fn parse_counted<R: BufRead>(
    reader: R,
    path: &str,
    names: (&str, &str),
) -> Result<Vec<(String, String, u64)>> {
    let mut agg: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut first_data_line = true;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let (a, b, c) = split3(&line, path, lineno)?;
        if first_data_line && c.trim().parse::<u64>().is_err() {
            // Header line by the non-numeric-third-column rule.
            first_data_line = false;
            continue;
        }
        first_data_line = false;
        check_key(a, names.0, path, lineno)?;
        check_key(b, names.1, path, lineno)?;
        let n = parse_count(c, path, lineno)?;
        let slot = agg.entry((a.to_string(), b.to_string())).or_insert(0);
        *slot = slot.checked_add(n).ok_or_else(|| {
            Error::Validation(format!("{path}:{lineno}: count overflow aggregating {a:?}/{b:?}"))
        })?;
    }
    Ok(agg.into_iter().map(|((a, b), n)| (a, b, n)).collect())
}

impl InteractionTable {
    /// Aggregate arbitrary rows (duplicates summed) into a sorted table.
    pub fn from_rows(rows: impl IntoIterator<Item = Interaction>) -> Result<Self> {
        let mut agg: BTreeMap<(String, String), u64> = BTreeMap::new();
        for r in rows {
            if !key_ok(&r.user) || !key_ok(&r.track) {
                return Err(Error::validation(format!(
                    "bad key in row ({:?}, {:?})",
                    r.user, r.track
                )));
            }
            if r.count == 0 {
                return Err(Error::validation(format!(
                    "count must be ≥ 1 for ({}, {})",
                    r.user, r.track
                )));
            }
            let slot = agg.entry((r.user, r.track)).or_insert(0);
            *slot = slot
                .checked_add(r.count)
                .ok_or_else(|| Error::validation("count overflow"))?;
        }
        Ok(InteractionTable {
            rows: agg
                .into_iter()
                .map(|((user, track), count)| Interaction { user, track, count })
                .collect(),
        })
    }

    pub fn parse_reader<R: BufRead>(reader: R, path: &str) -> Result<Self> {
        let rows = parse_counted(reader, path, ("user", "track"))?
            .into_iter()
            .map(|(user, track, count)| Interaction { user, track, count })
            .collect();
        Ok(InteractionTable { rows })
    }

    pub fn parse(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let f = File::open(p).map_err(|e| Error::io(p, e))?;
        Self::parse_reader(BufReader::new(f), &p.display().to_string())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(w, "{}\t{}\t{}", r.user, r.track, r.count)?;
        }
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        let f = File::create(p).map_err(|e| Error::io(p, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w).map_err(|e| Error::io(p, e))
    }

    pub fn rows(&self) -> &[Interaction] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Consecutive per-user row groups, in ascending user order.
    pub fn by_user(&self) -> impl Iterator<Item = (&str, &[Interaction])> {
        self.rows
            .chunk_by(|a, b| a.user == b.user)
            .map(|chunk| (chunk[0].user.as_str(), chunk))
    }

    pub fn user_count(&self) -> usize {
        self.by_user().count()
    }

    pub fn distinct_tracks(&self) -> usize {
        let mut tracks: Vec<&str> = self.rows.iter().map(|r| r.track.as_str()).collect();
        tracks.sort_unstable();
        tracks.dedup();
        tracks.len()
    }

    pub fn total_plays(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }
}

impl Catalog {
    pub fn from_entries(entries: impl IntoIterator<Item = CatalogEntry>) -> Result<Self> {
        let mut es: Vec<CatalogEntry> = entries.into_iter().collect();
        for e in &es {
            if !key_ok(&e.track) || !key_ok(&e.artist) {
                return Err(Error::validation(format!(
                    "bad key in catalog entry for track {:?}",
                    e.track
                )));
            }
            if let Some(al) = &e.album {
                if !key_ok(al) {
                    return Err(Error::validation(format!(
                        "bad album key for track {:?}",
                        e.track
                    )));
                }
            }
        }
        es.sort_by(|a, b| a.track.cmp(&b.track));
        for w in es.windows(2) {
            if w[0].track == w[1].track {
                return Err(Error::validation(format!(
                    "duplicate catalog entry for track {:?}",
                    w[0].track
                )));
            }
        }
        Ok(Catalog { entries: es })
    }

    pub fn parse_reader<R: BufRead>(reader: R, path: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let (track, artist, album) = split3(&line, path, lineno)?;
            if lineno == 1
                && track.eq_ignore_ascii_case("track")
                && artist.eq_ignore_ascii_case("artist")
                && album.eq_ignore_ascii_case("album")
            {
                continue; // canonical header
            }
            check_key(track, "track", path, lineno)?;
            check_key(artist, "artist", path, lineno)?;
            let album = if album.is_empty() {
                None
            } else {
                check_key(album, "album", path, lineno)?;
                Some(album.to_string())
            };
            entries.push(CatalogEntry {
                track: track.to_string(),
                artist: artist.to_string(),
                album,
            });
        }
        // Re-validates ordering/uniqueness.
        Catalog::from_entries(entries)
    }

    pub fn parse(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let f = File::open(p).map_err(|e| Error::io(p, e))?;
        Self::parse_reader(BufReader::new(f), &p.display().to_string())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for e in &self.entries {
            writeln!(
                w,
                "{}\t{}\t{}",
                e.track,
                e.artist,
                e.album.as_deref().unwrap_or("")
            )?;
        }
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        let f = File::create(p).map_err(|e| Error::io(p, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w).map_err(|e| Error::io(p, e))
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn lookup(&self, track: &str) -> Option<&CatalogEntry> {
        self.entries
            .binary_search_by(|e| e.track.as_str().cmp(track))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TagTable {
    pub fn from_rows(rows: impl IntoIterator<Item = TagRow>) -> Result<Self> {
        let mut agg: BTreeMap<(String, String), u64> = BTreeMap::new();
        for r in rows {
            if !key_ok(&r.track) || !key_ok(&r.tag) {
                return Err(Error::validation(format!(
                    "bad key in tag row ({:?}, {:?})",
                    r.track, r.tag
                )));
            }
            if r.count == 0 {
                return Err(Error::validation(format!(
                    "tag count must be ≥ 1 for ({}, {})",
                    r.track, r.tag
                )));
            }
            let slot = agg.entry((r.track, r.tag)).or_insert(0);
            *slot = slot
                .checked_add(r.count)
                .ok_or_else(|| Error::validation("tag count overflow"))?;
        }
        Ok(TagTable {
            rows: agg
                .into_iter()
                .map(|((track, tag), count)| TagRow { track, tag, count })
                .collect(),
        })
    }

    pub fn parse_reader<R: BufRead>(reader: R, path: &str) -> Result<Self> {
        let rows = parse_counted(reader, path, ("track", "tag"))?
            .into_iter()
            .map(|(track, tag, count)| TagRow { track, tag, count })
            .collect();
        Ok(TagTable { rows })
    }

    pub fn parse(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let f = File::open(p).map_err(|e| Error::io(p, e))?;
        Self::parse_reader(BufReader::new(f), &p.display().to_string())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(w, "{}\t{}\t{}", r.track, r.tag, r.count)?;
        }
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        let f = File::create(p).map_err(|e| Error::io(p, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w).map_err(|e| Error::io(p, e))
    }

    pub fn rows(&self) -> &[TagRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Tag rows of one track (sorted by tag), empty slice when untagged.
    pub fn track_tags(&self, track: &str) -> &[TagRow] {
        let lo = self.rows.partition_point(|r| r.track.as_str() < track);
        let hi = self.rows.partition_point(|r| r.track.as_str() <= track);
        &self.rows[lo..hi]
    }

    pub fn distinct_tags(&self) -> usize {
        let mut tags: Vec<&str> = self.rows.iter().map(|r| r.tag.as_str()).collect();
        tags.sort_unstable();
        tags.dedup();
        tags.len()
    }
}

/// Keep each user's k most-played tracks (all of them when fewer), ties by
/// ascending track id. Applied after count aggregation.
pub fn filter_top_k_per_user(table: &InteractionTable, k: usize) -> InteractionTable {
    assert!(k >= 1, "top-k filter requires k ≥ 1");
    let mut kept: Vec<Interaction> = Vec::new();
    for (_user, rows) in table.by_user() {
        if rows.len() <= k {
            kept.extend_from_slice(rows);
            continue;
        }
        let mut order: Vec<&Interaction> = rows.iter().collect();
        order.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.track.cmp(&b.track)));
        order.truncate(k);
        kept.extend(order.into_iter().cloned());
    }
    // Rows of one user may now be out of (user, track) order; restore it.
    kept.sort_by(|a, b| a.user.cmp(&b.user).then_with(|| a.track.cmp(&b.track)));
    InteractionTable { rows: kept }
}

/// Per-user hold-out split for one fold.
///
/// Each user's filtered tracks are shuffled once, keyed by (seed, user id)
/// only — folds of the same seed share the permutation and differ in which
/// window they hold out, so at the default 0.9/10-fold setting every track is
/// tested exactly once across folds. The test window starts at partition cell
/// `fold_index` and spans round((1−ratio)·m) tracks (≥ 1, < m), wrapping
/// around the permutation if needed.
///
/// Users with a single track cannot yield a nonempty train and test set; they
/// are skipped with a warning and appear in neither output.
pub fn split(table: &InteractionTable, spec: &SplitSpec) -> Result<(InteractionTable, InteractionTable)> {
    spec.validate()?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (user, rows) in table.by_user() {
        let m = rows.len();
        if m < 2 {
            log::warn!("user {user:?} has a single filtered track; skipped (cannot hold out)");
            continue;
        }
        let mut order: Vec<usize> = (0..m).collect();
        let mut rng = rng::stream(spec.seed, &[purpose::SPLIT, rng::key_hash(user)]);
        rng::shuffle(&mut order, &mut rng);

        let want = ((1.0 - spec.train_ratio) * m as f64).round() as usize;
        let test_len = want.clamp(1, m - 1);
        let start = (spec.fold_index as usize * m) / spec.folds as usize;
        let mut is_test = vec![false; m];
        for off in 0..test_len {
            is_test[order[(start + off) % m]] = true;
        }
        for (i, row) in rows.iter().enumerate() {
            if is_test[i] {
                test.push(row.clone());
            } else {
                train.push(row.clone());
            }
        }
    }
    Ok((
        InteractionTable { rows: train },
        InteractionTable { rows: test },
    ))
}
