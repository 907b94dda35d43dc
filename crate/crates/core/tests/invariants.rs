//! Cross-module property suite: contracts that must hold for arbitrary
//! inputs, exercised end to end through the public API. The unit tests in
//! each module pin worked examples; these pin the shapes of the guarantees.

use std::collections::{BTreeMap, BTreeSet};

use hyperrec_core::dataset::{
    filter_top_k_per_user, split, Catalog, CatalogEntry, Interaction, InteractionTable, SplitSpec,
    TagRow, TagTable,
};
use hyperrec_core::embedding::{train_skipgram, EmbeddingConfig, EmbeddingTable};
use hyperrec_core::eval::{aggr_div_at_n, hit_ratio_at_n, map_at_n, ndcg_at_n, recall_at_n};
use hyperrec_core::hypergraph::{EdgeKind, EdgeKindSet, Hypergraph, Vertex, VertexKind};
use hyperrec_core::ranker::{
    recommend, AlphaMode, RankMode, RankerConfig, RecommendationList,
};
use hyperrec_core::walker::{check_corpus, generate_walks, WalkConfig, WalkCorpus};
use proptest::prelude::*;

const WEIGHT_SUM_TOL: f64 = 1e-9;

// ---- strategies ---------------------------------------------------------

/// Raw interaction rows over a small universe, duplicates welcome: narrow
/// key spaces force the aggregation, sorting, and collision paths.
fn raw_interactions() -> impl Strategy<Value = Vec<Interaction>> {
    prop::collection::vec(
        (0..8u8, 0..20u8, 1..40u64).prop_map(|(u, t, c)| Interaction {
            user: format!("u{u}"),
            track: format!("t{t}"),
            count: c,
        }),
        1..120,
    )
}

/// Catalog covering the whole track universe of `raw_interactions`, with a
/// mix of albumful and albumless tracks.
fn full_catalog() -> Catalog {
    Catalog::from_entries((0..20u8).map(|t| CatalogEntry {
        track: format!("t{t}"),
        artist: format!("a{}", t % 5),
        album: if t % 3 == 0 { None } else { Some(format!("al{}", t % 7)) },
    }))
    .expect("synthetic catalog is valid")
}

/// Tag rows over the same track universe; some tracks stay untagged.
fn raw_tags() -> impl Strategy<Value = Vec<TagRow>> {
    prop::collection::vec(
        (0..20u8, 0..6u8, 1..9u64).prop_map(|(t, g, c)| TagRow {
            track: format!("t{t}"),
            tag: format!("g{g}"),
            count: c,
        }),
        0..40,
    )
}

// ---- dataset ------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Parsing the serialized rows agrees with aggregating them in memory:
    /// duplicate (user, track) pairs sum, rows come out sorted and unique.
    #[test]
    fn parse_agrees_with_in_memory_aggregation(rows in raw_interactions()) {
        let mut text = String::new();
        for r in &rows {
            text.push_str(&format!("{}\t{}\t{}\n", r.user, r.track, r.count));
        }
        let parsed = InteractionTable::parse_reader(text.as_bytes(), "mem").unwrap();
        let built = InteractionTable::from_rows(rows.iter().cloned()).unwrap();
        prop_assert_eq!(parsed.rows(), built.rows());

        let mut expected: BTreeMap<(String, String), u64> = BTreeMap::new();
        for r in &rows {
            *expected.entry((r.user.clone(), r.track.clone())).or_insert(0) += r.count;
        }
        prop_assert_eq!(parsed.rows().len(), expected.len());
        for row in parsed.rows() {
            prop_assert_eq!(expected[&(row.user.clone(), row.track.clone())], row.count);
        }
        let keys: Vec<(&str, &str)> =
            parsed.rows().iter().map(|r| (r.user.as_str(), r.track.as_str())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        prop_assert_eq!(keys, sorted, "rows must be sorted by (user, track)");
    }

    /// The per-user top-k filter is idempotent, bounds each user's distinct
    /// tracks by k, and never invents or reweights rows.
    #[test]
    fn top_k_filter_idempotent_and_bounded(
        rows in raw_interactions(),
        k in 1usize..6,
    ) {
        let table = InteractionTable::from_rows(rows).unwrap();
        let once = filter_top_k_per_user(&table, k);
        let twice = filter_top_k_per_user(&once, k);
        prop_assert_eq!(once.rows(), twice.rows(), "filter must be idempotent");
        let mut per_user: BTreeMap<&str, usize> = BTreeMap::new();
        for row in once.rows() {
            *per_user.entry(&row.user).or_insert(0) += 1;
            prop_assert!(
                table.rows().contains(row),
                "filter must select existing rows unchanged"
            );
        }
        for (user, tracks) in per_user {
            prop_assert!(tracks <= k, "user {user} kept {tracks} > k={k} tracks");
        }
    }

    /// Per user, a split is an exact two-way partition of that user's rows;
    /// every surviving user keeps at least one row on each side, and the
    /// held-out size follows the rounded ratio clamped to [1, m-1].
    #[test]
    fn split_partitions_each_user(
        rows in raw_interactions(),
        ratio in 0.5f64..0.95,
        folds in 2u32..10,
        fold_raw in 0u32..100,
        seed in any::<u64>(),
    ) {
        let table = InteractionTable::from_rows(rows).unwrap();
        let spec = SplitSpec {
            train_ratio: ratio,
            fold_index: fold_raw % folds,
            folds,
            seed,
        };
        let (train, test) = split(&table, &spec).unwrap();
        let mut original: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for r in table.rows() {
            original.entry(&r.user).or_default().insert(&r.track);
        }
        let mut train_by: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for r in train.rows() {
            train_by.entry(&r.user).or_default().insert(&r.track);
        }
        let mut test_by: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for r in test.rows() {
            test_by.entry(&r.user).or_default().insert(&r.track);
        }
        for (user, tracks) in &original {
            let m = tracks.len();
            let tr = train_by.get(user).cloned().unwrap_or_default();
            let te = test_by.get(user).cloned().unwrap_or_default();
            if m < 2 {
                prop_assert!(tr.is_empty() && te.is_empty(), "single-track user must be dropped");
                continue;
            }
            prop_assert!(tr.is_disjoint(&te), "user {user}: train and test overlap");
            let union: BTreeSet<&str> = tr.union(&te).copied().collect();
            prop_assert_eq!(&union, tracks, "user {} loses or gains tracks", user);
            let want = ((1.0 - ratio) * m as f64).round() as usize;
            prop_assert_eq!(te.len(), want.clamp(1, m - 1), "user {} held-out size", user);
        }
    }
}

// ---- hypergraph ---------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Every built hyperedge carries member weights summing to one, and the
    /// per-family edge counts match their defining formulas, whichever
    /// optional families are enabled.
    #[test]
    fn built_graphs_are_normalized_with_exact_edge_counts(
        rows in raw_interactions(),
        tag_rows in raw_tags(),
        with_tags in any::<bool>(),
        with_albums in any::<bool>(),
        with_artists in any::<bool>(),
    ) {
        let table = InteractionTable::from_rows(rows).unwrap();
        let catalog = full_catalog();
        let tags = TagTable::from_rows(tag_rows).unwrap();
        let mut kinds = EdgeKindSet::empty().with(EdgeKind::UserTrack);
        if with_tags {
            kinds = kinds.with(EdgeKind::TagTrack);
        }
        if with_albums {
            kinds = kinds.with(EdgeKind::AlbumTrack);
        }
        if with_artists {
            kinds = kinds.with(EdgeKind::ArtistTrack);
        }
        let g = Hypergraph::build(&table, &catalog, &tags, kinds).unwrap();

        for e in g.edges() {
            let sum: f64 = e.members.iter().map(|(_, w)| w).sum();
            prop_assert!(
                (sum - 1.0).abs() <= WEIGHT_SUM_TOL,
                "{:?} edge sums to {sum}",
                e.kind
            );
        }

        let tracks: BTreeSet<&str> = table.rows().iter().map(|r| r.track.as_str()).collect();
        let tagged = tracks.iter().filter(|t| !tags.track_tags(t).is_empty()).count();
        let albums: BTreeSet<&str> = tracks
            .iter()
            .filter_map(|t| catalog.lookup(t).unwrap().album.as_deref())
            .collect();
        let artists: BTreeSet<&str> = tracks
            .iter()
            .map(|t| catalog.lookup(t).unwrap().artist.as_str())
            .collect();
        prop_assert_eq!(g.edge_count_of_kind(EdgeKind::UserTrack), table.user_count());
        prop_assert_eq!(
            g.edge_count_of_kind(EdgeKind::TagTrack),
            if with_tags { tagged } else { 0 }
        );
        prop_assert_eq!(
            g.edge_count_of_kind(EdgeKind::AlbumTrack),
            if with_albums { albums.len() } else { 0 }
        );
        prop_assert_eq!(
            g.edge_count_of_kind(EdgeKind::ArtistTrack),
            if with_artists { artists.len() } else { 0 }
        );

        // Vertex blocks: kinds grouped and in declaration order.
        let mut last_kind = None;
        for v in g.vertices() {
            if let Some(prev) = last_kind {
                prop_assert!(v.kind as u8 >= prev, "vertex blocks out of order");
            }
            last_kind = Some(v.kind as u8);
        }

        // The binary format reproduces the graph exactly.
        let mut bytes = Vec::new();
        g.save_to(&mut bytes).unwrap();
        let back = Hypergraph::load_from(&mut bytes.as_slice(), "mem").unwrap();
        prop_assert_eq!(back.fingerprint(), g.fingerprint());
        prop_assert_eq!(back.vertices(), g.vertices());
        prop_assert_eq!(back.edges(), g.edges());
    }
}

// ---- walks and training -------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Walk corpora are complete (one walk per start and iteration, each of
    /// the configured length), valid (every consecutive pair shares an
    /// edge), and survive the text format byte for byte.
    #[test]
    fn corpora_are_complete_valid_and_round_trip(
        rows in raw_interactions(),
        tag_rows in raw_tags(),
        iterations in 1u32..3,
        length in 2u32..24,
        stay in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let table = InteractionTable::from_rows(rows).unwrap();
        let tags = TagTable::from_rows(tag_rows).unwrap();
        let g = Hypergraph::build(&table, &full_catalog(), &tags, EdgeKindSet::all()).unwrap();
        let cfg = WalkConfig {
            iterations,
            length,
            stay_probability: stay,
            seed,
            ..WalkConfig::default()
        };
        let corpus = generate_walks(&g, &cfg).unwrap();
        prop_assert_eq!(corpus.walks.len(), iterations as usize * g.vertices().len());
        let transitions = check_corpus(&g, &corpus).unwrap();
        prop_assert_eq!(
            transitions,
            corpus.walks.len() as u64 * u64::from(length - 1)
        );

        let mut text = Vec::new();
        corpus.save_to(&mut text).unwrap();
        let back = WalkCorpus::load_from(text.as_slice(), "mem").unwrap();
        prop_assert_eq!(&back.walks, &corpus.walks);
        prop_assert_eq!(back.graph_fingerprint, corpus.graph_fingerprint);
        let mut text2 = Vec::new();
        back.save_to(&mut text2).unwrap();
        prop_assert_eq!(text, text2, "text format must round-trip byte-identically");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Single-worker training is deterministic, produces finite embeddings
    /// for every graph vertex, and the binary format round-trips exactly.
    #[test]
    fn training_is_deterministic_finite_and_round_trips(
        rows in raw_interactions(),
        dim in 4usize..12,
        seed in any::<u64>(),
    ) {
        let table = InteractionTable::from_rows(rows).unwrap();
        let g = Hypergraph::build(
            &table,
            &full_catalog(),
            &TagTable::default(),
            EdgeKindSet::all(),
        )
        .unwrap();
        let walk_cfg = WalkConfig { iterations: 1, length: 12, ..WalkConfig::default() };
        let corpus = generate_walks(&g, &walk_cfg).unwrap();
        let cfg = EmbeddingConfig { dim, epochs: 1, seed, workers: 1, ..EmbeddingConfig::default() };
        let (table_a, stats_a) = train_skipgram(&corpus, &g, &cfg).unwrap();
        let (table_b, stats_b) = train_skipgram(&corpus, &g, &cfg).unwrap();
        prop_assert_eq!(&stats_a.epoch_loss, &stats_b.epoch_loss);

        let mut bytes_a = Vec::new();
        table_a.save_to(&mut bytes_a).unwrap();
        let mut bytes_b = Vec::new();
        table_b.save_to(&mut bytes_b).unwrap();
        prop_assert_eq!(&bytes_a, &bytes_b, "identical config and seed must reproduce bytes");

        prop_assert_eq!(table_a.len(), g.vertices().len());
        for i in 0..table_a.len() {
            prop_assert!(table_a.vector(i).iter().all(|v| v.is_finite()));
        }
        let back = EmbeddingTable::load_from(&mut bytes_a.as_slice(), "mem").unwrap();
        prop_assert!(back.verify_graph(&g).is_ok());
        for i in 0..table_a.len() {
            prop_assert_eq!(back.vector(i), table_a.vector(i));
        }
        prop_assert!(stats_a.epoch_loss.iter().all(|l| l.is_finite() && *l >= 0.0));
    }
}

// ---- ranking ------------------------------------------------------------

/// Embedding table over one user and `n_tracks` tracks with given values.
fn table_from_values(dim: usize, values: &[f64], n_tracks: usize) -> EmbeddingTable {
    let mut vertices = vec![Vertex { kind: VertexKind::User, key: "u0".into() }];
    for t in 0..n_tracks {
        vertices.push(Vertex { kind: VertexKind::Track, key: format!("c{t:02}") });
    }
    let input = values[..vertices.len() * dim].to_vec();
    let output = vec![0.0; vertices.len() * dim];
    EmbeddingTable::from_parts(dim, 0, vertices, input, output)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Recommendation lists are well-formed for arbitrary geometry: correct
    /// length, strictly increasing positions, no duplicates, no excluded or
    /// foreign tracks; a zero trade-off factor reproduces the pure
    /// relevance ordering, as does the literal per-position rescoring.
    #[test]
    fn recommendation_lists_are_well_formed(
        dim in 2usize..5,
        n_tracks in 1usize..14,
        raw in prop::collection::vec(-2.0f64..2.0, 15 * 5),
        n in 1usize..12,
        excl_mask in any::<u16>(),
        mode_pick in 0u8..3,
    ) {
        let table = table_from_values(dim, &raw, n_tracks);
        let candidates: BTreeSet<String> = (0..n_tracks).map(|t| format!("c{t:02}")).collect();
        let mut exclusions: BTreeSet<String> = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| excl_mask & (1 << i) != 0)
            .map(|(_, t)| t.clone())
            .collect();
        if exclusions.len() == candidates.len() {
            let keep = exclusions.iter().next().unwrap().clone();
            exclusions.remove(&keep);
        }
        let mode = match mode_pick {
            0 => RankMode::RelevanceOnly,
            1 => RankMode::LiteralDiversity,
            _ => RankMode::MmrGreedy,
        };
        let cfg = RankerConfig { n, mode, ..RankerConfig::default() };
        let list = recommend(&table, "u0", &candidates, &exclusions, &cfg).unwrap();

        let avail = candidates.len() - exclusions.len();
        prop_assert_eq!(list.items.len(), n.min(avail));
        let mut seen = BTreeSet::new();
        for (i, item) in list.items.iter().enumerate() {
            prop_assert_eq!(item.position, i + 1);
            prop_assert!(seen.insert(item.track.clone()), "duplicate {}", item.track);
            prop_assert!(candidates.contains(&item.track), "foreign track {}", item.track);
            prop_assert!(!exclusions.contains(&item.track), "excluded track {}", item.track);
        }

        let rel_cfg = RankerConfig { n, mode: RankMode::RelevanceOnly, ..RankerConfig::default() };
        let relevance = recommend(&table, "u0", &candidates, &exclusions, &rel_cfg).unwrap();
        let zero_cfg = RankerConfig {
            n,
            mode: RankMode::MmrGreedy,
            alpha_mode: AlphaMode::Fixed(0.0),
            ..RankerConfig::default()
        };
        let zero = recommend(&table, "u0", &candidates, &exclusions, &zero_cfg).unwrap();
        prop_assert_eq!(zero.tracks(), relevance.tracks(), "zero trade-off must match relevance");
        let lit_cfg = RankerConfig {
            n,
            mode: RankMode::LiteralDiversity,
            ..RankerConfig::default()
        };
        let literal = recommend(&table, "u0", &candidates, &exclusions, &lit_cfg).unwrap();
        prop_assert_eq!(
            literal.tracks(),
            relevance.tracks(),
            "per-position rescoring is rank-equivalent to relevance"
        );
    }
}

// ---- metrics ------------------------------------------------------------

fn id_list(bits: u32) -> Vec<String> {
    (0..20u8).filter(|i| bits & (1 << i) != 0).map(|i| format!("p{i}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Accuracy metrics stay in [0,1]; the prefix metrics never decrease as
    /// the list grows; recall never exceeds the hit indicator; the tag
    /// diversity score is nonnegative and zero exactly on untagged lists.
    #[test]
    fn metric_bounds_and_monotonicity(
        rec_bits in 1u32..(1 << 20),
        rel_bits in 1u32..(1 << 20),
        n in 1usize..24,
        tag_rows in raw_tags(),
    ) {
        let recommended = id_list(rec_bits);
        let relevant: BTreeSet<String> = id_list(rel_bits).into_iter().collect();
        for metric in [recall_at_n, hit_ratio_at_n, map_at_n, ndcg_at_n] {
            let v = metric(&recommended, &relevant, n);
            prop_assert!((0.0..=1.0).contains(&v), "metric value {v} out of range");
        }
        for metric in [recall_at_n, hit_ratio_at_n, ndcg_at_n] {
            let here = metric(&recommended, &relevant, n);
            let next = metric(&recommended, &relevant, n + 1);
            prop_assert!(next >= here, "prefix metric decreased: {here} -> {next}");
        }
        prop_assert!(
            recall_at_n(&recommended, &relevant, n)
                <= hit_ratio_at_n(&recommended, &relevant, n)
        );

        // Ideal arrangement normalizes to exactly one.
        let ideal: Vec<String> = relevant
            .iter()
            .cloned()
            .chain(recommended.iter().filter(|t| !relevant.contains(*t)).cloned())
            .collect();
        if relevant.len() <= n {
            let v = ndcg_at_n(&ideal, &relevant, n);
            prop_assert!((v - 1.0).abs() <= 1e-12, "ideal ndcg was {v}");
        }

        let tags = TagTable::from_rows(tag_rows).unwrap();
        let list = RecommendationList {
            user: "u".into(),
            items: recommended
                .iter()
                .enumerate()
                .map(|(i, t)| hyperrec_core::ranker::RankedItem {
                    track: t.clone(),
                    relevance: 0.0,
                    position: i + 1,
                })
                .collect(),
            mode: "relevance_only".into(),
        };
        let d = aggr_div_at_n(&list, &tags, n);
        prop_assert!(d >= 0.0 && d.is_finite());
        let untagged = recommended
            .iter()
            .take(n)
            .all(|t| tags.track_tags(t).is_empty());
        prop_assert_eq!(d == 0.0, untagged, "diversity zero iff listed tracks untagged");
    }
}

// ---- parallel training tolerance ----------------------------------------

/// Multi-worker lock-free training is allowed to drift from the sequential
/// schedule, but the optimization must land in the same regime: final epoch
/// loss within 10% of the single-worker run.
#[cfg(feature = "parallel")]
#[test]
fn hogwild_training_stays_within_loss_tolerance() {
    use hyperrec_core::synthetic::generate_synthetic;

    let (inter, catalog, tags) = generate_synthetic(20, 120, 10, 14, 12, 5).unwrap();
    let g = Hypergraph::build(&inter, &catalog, &tags, EdgeKindSet::all()).unwrap();
    let corpus = generate_walks(
        &g,
        &WalkConfig { iterations: 2, length: 80, ..WalkConfig::default() },
    )
    .unwrap();
    let base = EmbeddingConfig { dim: 24, epochs: 2, ..EmbeddingConfig::default() };
    let (_, sequential) =
        train_skipgram(&corpus, &g, &EmbeddingConfig { workers: 1, ..base.clone() }).unwrap();
    let (_, parallel) =
        train_skipgram(&corpus, &g, &EmbeddingConfig { workers: 4, ..base }).unwrap();
    let s = *sequential.epoch_loss.last().unwrap();
    let p = *parallel.epoch_loss.last().unwrap();
    assert!(
        (s - p).abs() / s <= 0.10,
        "hogwild final loss {p} drifted more than 10% from sequential {s}"
    );
}
