//! Deterministic synthetic dataset generator.
//!
//! Produces a small music world with enough structure for end-to-end runs to
//! show meaningful signal: artists own contiguous track blocks, albums
//! subdivide them, tags cluster into genres aligned with artists, global
//! popularity follows a Zipf-like curve concentrated in the first genre, and
//! each user listens mostly inside a narrow artist window.
//!
//! Exact guarantees (relied on by tests): entity counts equal the requested
//! parameters, the total number of listening events is
//! `n_users * plays_per_user(n_users, n_tracks)`, and identical arguments
//! yield byte-identical tables.

use rand::Rng;

use crate::dataset::{Catalog, CatalogEntry, Interaction, InteractionTable, TagRow, TagTable};
use crate::error::{Error, Result};
use crate::rng::{self, purpose};
use crate::sampling::CumTable;

/// Width-padded entity keys, sortable in index order at any supported size.
fn key(prefix: &str, i: usize, width: usize) -> String {
    format!("{prefix}{i:0w$}", w = width)
}

fn digits(n: usize) -> usize {
    n.max(1).to_string().len()
}

/// Floor map of `i ∈ [0, n)` onto `[0, m)`; contiguous blocks, all of `[0, m)`
/// covered when `n ≥ m`.
fn block_of(i: usize, n: usize, m: usize) -> usize {
    i * m / n
}

/// Half-open range of `[0, n)` indices mapped onto block `j` of `[0, m)`.
fn block_range(j: usize, n: usize, m: usize) -> std::ops::Range<usize> {
    (j * n).div_ceil(m)..((j + 1) * n).div_ceil(m)
}

/// Listening events each generated user produces. Scales up when tracks
/// outnumber users enough that per-user coverage blocks get large.
pub fn plays_per_user(n_users: usize, n_tracks: usize) -> u64 {
    200.max(2 * n_tracks.div_ceil(n_users)) as u64
}

const MAX_TAGS_PER_TRACK: usize = 5;
const USER_ARTIST_WINDOW: usize = 3;

pub fn generate_synthetic(
    n_users: usize,
    n_tracks: usize,
    n_artists: usize,
    n_albums: usize,
    n_tags: usize,
    seed: u64,
) -> Result<(InteractionTable, Catalog, TagTable)> {
    for (name, v) in [
        ("n_users", n_users),
        ("n_tracks", n_tracks),
        ("n_artists", n_artists),
        ("n_albums", n_albums),
        ("n_tags", n_tags),
    ] {
        if v == 0 {
            return Err(Error::validation(format!("{name} must be ≥ 1")));
        }
    }
    if n_tracks < n_albums {
        return Err(Error::validation(format!(
            "infeasible counts: n_tracks ({n_tracks}) < n_albums ({n_albums})"
        )));
    }
    if n_tracks < n_artists {
        return Err(Error::validation(format!(
            "infeasible counts: n_tracks ({n_tracks}) < n_artists ({n_artists})"
        )));
    }
    if n_tags > MAX_TAGS_PER_TRACK * n_tracks {
        return Err(Error::validation(format!(
            "infeasible counts: n_tags ({n_tags}) > {MAX_TAGS_PER_TRACK} * n_tracks"
        )));
    }

    let uw = digits(n_users - 1).max(4);
    let tw = digits(n_tracks - 1).max(5);
    let arw = digits(n_artists - 1).max(3);
    let alw = digits(n_albums - 1).max(4);
    let taw = digits(n_tags - 1).max(3);
    let track_key = |t: usize| key("t", t, tw);

    // --- Catalog: contiguous artist blocks; ~80% album membership. ---
    let mut has_album = vec![true; n_tracks];
    {
        let mut r = rng::stream(seed, &[purpose::SYNTH, 1]);
        for slot in has_album.iter_mut() {
            *slot = r.random::<f64>() < 0.8;
        }
    }
    for al in 0..n_albums {
        // Every album keeps at least its block's first track.
        let range = block_range(al, n_tracks, n_albums);
        if !range.clone().any(|t| has_album[t]) {
            has_album[range.start] = true;
        }
    }
    let catalog = Catalog::from_entries((0..n_tracks).map(|t| CatalogEntry {
        track: track_key(t),
        artist: key("ar", block_of(t, n_tracks, n_artists), arw),
        album: has_album[t].then(|| key("al", block_of(t, n_tracks, n_albums), alw)),
    }))?;

    // --- Tags: genre-aligned pools with guaranteed coverage of every tag. ---
    let genres = 8.min(n_tags).min(n_artists);
    let genre_of_track = |t: usize| block_of(block_of(t, n_tracks, n_artists), n_artists, genres);
    for g in 0..genres {
        let tags_g = block_range(g, n_tags, genres).len();
        let tracks_in_g = (0..n_tracks).filter(|&t| genre_of_track(t) == g).count();
        if tags_g > MAX_TAGS_PER_TRACK * tracks_in_g {
            return Err(Error::validation(format!(
                "infeasible counts: genre {g} holds {tags_g} tags but only {tracks_in_g} tracks"
            )));
        }
    }
    let mut track_tag_sets: Vec<Vec<usize>> = vec![Vec::new(); n_tracks];
    for g in 0..genres {
        // Spread this genre's tags over its tracks round-robin so every tag
        // is used at least once.
        let tag_range = block_range(g, n_tags, genres);
        let tracks_in_g: Vec<usize> = (0..n_tracks).filter(|&t| genre_of_track(t) == g).collect();
        for (j, ta) in tag_range.enumerate() {
            track_tag_sets[tracks_in_g[j % tracks_in_g.len()]].push(ta);
        }
    }
    {
        let mut r = rng::stream(seed, &[purpose::SYNTH, 2]);
        for (t, set) in track_tag_sets.iter_mut().enumerate() {
            let pool = block_range(genre_of_track(t), n_tags, genres);
            let target = r.random_range(1..=MAX_TAGS_PER_TRACK).min(pool.len());
            let mut attempts = 0;
            while set.len() < target && attempts < 32 {
                let ta = pool.start + r.random_range(0..pool.len());
                if !set.contains(&ta) {
                    set.push(ta);
                }
                attempts += 1;
            }
            set.sort_unstable();
        }
    }
    let mut tag_rows = Vec::new();
    {
        let mut r = rng::stream(seed, &[purpose::SYNTH, 3]);
        for (t, set) in track_tag_sets.iter().enumerate() {
            for &ta in set {
                tag_rows.push(TagRow {
                    track: track_key(t),
                    tag: key("ta", ta, taw),
                    count: r.random_range(1..=8),
                });
            }
        }
    }
    let tags = TagTable::from_rows(tag_rows)?;

    // --- Interactions: coverage block plus Zipf-weighted window listening. ---
    let plays = plays_per_user(n_users, n_tracks);
    let artist_weights =
        CumTable::new((0..n_artists).map(|a| 1.0 / ((a + 1) as f64).powf(0.8)).collect());
    let mut rows = Vec::new();
    for u in 0..n_users {
        let mut r = rng::stream(seed, &[purpose::SYNTH, 4, u as u64]);
        // Draw order per user: (1) artist window, (2) extra track picks,
        // (3) play allocation. Popularity-weighted windows make a minority
        // of artists absorb most listening, as real charts do.
        let a0 = artist_weights.sample(&mut r).unwrap_or(0);
        let a1 = (a0 + USER_ARTIST_WINDOW).min(n_artists);
        // Guaranteed-coverage block: the union over users is every track.
        let own = block_range(u, n_tracks, n_users.min(n_tracks));
        let mut picked: Vec<usize> = if u < n_users.min(n_tracks) {
            own.collect()
        } else {
            Vec::new()
        };
        // Preference window: tracks of a few consecutive artists.
        let pool_lo = block_range(a0, n_tracks, n_artists).start;
        let pool_hi = block_range(a1 - 1, n_tracks, n_artists).end;
        let pool_len = pool_hi - pool_lo;
        let target = picked.len().max(20.min(pool_len));
        let mut attempts = 0;
        while picked.len() < target && attempts < 40 * target {
            let t = pool_lo + r.random_range(0..pool_len);
            if !picked.contains(&t) {
                picked.push(t);
            }
            attempts += 1;
        }
        picked.sort_unstable();
        debug_assert!(picked.len() as u64 <= plays);
        // One base play each, the rest concentrated on the head of the
        // user's list by local listening rank.
        let mut counts = vec![1u64; picked.len()];
        let rank_weights = CumTable::new(
            (0..picked.len()).map(|i| 1.0 / ((i + 1) as f64).powf(1.2)).collect(),
        );
        for _ in 0..(plays - picked.len() as u64) {
            let i = rank_weights.sample(&mut r).unwrap_or(0);
            counts[i] += 1;
        }
        for (i, &t) in picked.iter().enumerate() {
            rows.push(Interaction {
                user: key("u", u, uw),
                track: track_key(t),
                count: counts[i],
            });
        }
    }
    let interactions = InteractionTable::from_rows(rows)?;
    Ok((interactions, catalog, tags))
}
