//! The weighted hypergraph connecting users, tracks, albums, artists, and
//! tags, plus its degree/incidence queries and binary persistence.
//!
//! Four hyperedge families exist, each with a hub vertex (implicit weight 1)
//! and weighted members normalized to sum to 1:
//!   e1 — hub user, members their training tracks, by play share;
//!   e2 — hub track, members its tags, by annotation share;
//!   e3 — hub album, members its trained tracks, by total play share;
//!   e4 — hub artist, members its trained tracks, by total play share.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::binio;
use crate::dataset::{Catalog, InteractionTable, TagTable};
use crate::error::{Error, Result};
use crate::fingerprint::Fnv1a;

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;
const GRAPH_MAGIC: &[u8; 8] = b"HRECGRPH";
const GRAPH_VERSION: u8 = 1;

/// Vertex families, in dense-index block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    User,
    Track,
    Album,
    Artist,
    Tag,
}

impl VertexKind {
    pub const ALL: [VertexKind; 5] = [
        VertexKind::User,
        VertexKind::Track,
        VertexKind::Album,
        VertexKind::Artist,
        VertexKind::Tag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VertexKind::User => "user",
            VertexKind::Track => "track",
            VertexKind::Album => "album",
            VertexKind::Artist => "artist",
            VertexKind::Tag => "tag",
        }
    }

    fn from_u8(b: u8) -> Option<Self> {
        Self::ALL.get(b as usize).copied()
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VertexKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown vertex kind {s:?}")))
    }
}

/// Hyperedge families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    UserTrack,
    TagTrack,
    AlbumTrack,
    ArtistTrack,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 4] = [
        EdgeKind::UserTrack,
        EdgeKind::TagTrack,
        EdgeKind::AlbumTrack,
        EdgeKind::ArtistTrack,
    ];

    /// Short code used in flags, dumps, and file formats.
    pub fn code(self) -> &'static str {
        match self {
            EdgeKind::UserTrack => "e1",
            EdgeKind::TagTrack => "e2",
            EdgeKind::AlbumTrack => "e3",
            EdgeKind::ArtistTrack => "e4",
        }
    }

    pub fn hub_kind(self) -> VertexKind {
        match self {
            EdgeKind::UserTrack => VertexKind::User,
            EdgeKind::TagTrack => VertexKind::Track,
            EdgeKind::AlbumTrack => VertexKind::Album,
            EdgeKind::ArtistTrack => VertexKind::Artist,
        }
    }

    pub fn member_kind(self) -> VertexKind {
        match self {
            EdgeKind::TagTrack => VertexKind::Tag,
            _ => VertexKind::Track,
        }
    }

    fn from_u8(b: u8) -> Option<Self> {
        Self::ALL.get(b as usize).copied()
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for EdgeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.code() == s)
            .ok_or_else(|| Error::validation(format!("unknown edge kind {s:?} (use e1..e4)")))
    }
}

/// Set of enabled hyperedge families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeKindSet(u8);

impl EdgeKindSet {
    pub fn all() -> Self {
        EdgeKindSet(0b1111)
    }

    pub fn empty() -> Self {
        EdgeKindSet(0)
    }

    pub fn contains(self, k: EdgeKind) -> bool {
        self.0 & (1 << k as u8) != 0
    }

    pub fn with(mut self, k: EdgeKind) -> Self {
        self.0 |= 1 << k as u8;
        self
    }

    pub fn without(mut self, k: EdgeKind) -> Self {
        self.0 &= !(1 << k as u8);
        self
    }

    /// Parse a comma-separated list such as `"e2,e3"`; empty string → empty set.
    pub fn parse_list(s: &str) -> Result<Self> {
        let mut set = EdgeKindSet::empty();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            set = set.with(part.parse()?);
        }
        Ok(set)
    }
}

impl fmt::Display for EdgeKindSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in EdgeKind::ALL {
            if self.contains(k) {
                if !first {
                    f.write_str(",")?;
                }
                f.write_str(k.code())?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Set of vertex kinds (walk starts, export filters).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexKindSet(u8);

impl VertexKindSet {
    pub fn all() -> Self {
        VertexKindSet(0b11111)
    }

    pub fn empty() -> Self {
        VertexKindSet(0)
    }

    pub fn contains(self, k: VertexKind) -> bool {
        self.0 & (1 << k as u8) != 0
    }

    pub fn with(mut self, k: VertexKind) -> Self {
        self.0 |= 1 << k as u8;
        self
    }

    pub fn parse_list(s: &str) -> Result<Self> {
        let mut set = VertexKindSet::empty();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            set = set.with(part.parse()?);
        }
        Ok(set)
    }
}

impl fmt::Display for VertexKindSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in VertexKind::ALL {
            if self.contains(k) {
                if !first {
                    f.write_str(",")?;
                }
                f.write_str(k.name())?;
                first = false;
            }
        }
        Ok(())
    }
}

/// A named vertex; its dense index is its position in [`Hypergraph::vertices`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub kind: VertexKind,
    pub key: String,
}

/// One hyperedge: hub (weight 1) plus normalized weighted members.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    pub kind: EdgeKind,
    pub hub: usize,
    pub members: Vec<(usize, f64)>,
}

impl Hyperedge {
    pub fn degree(&self) -> usize {
        1 + self.members.len()
    }

    /// Weight of `v` inside this edge: 1 for the hub, the normalized member
    /// weight otherwise, `None` when `v` is not on the edge.
    pub fn weight_of(&self, v: usize) -> Option<f64> {
        if v == self.hub {
            return Some(1.0);
        }
        self.members
            .iter()
            .find(|(m, _)| *m == v)
            .map(|(_, w)| *w)
    }
}

/// Coordinate-list sparse 0/1 incidence matrix, |vertices| × |edges|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub rows: usize,
    pub cols: usize,
    /// (vertex index, edge index) pairs where the entry is 1, edge-major.
    pub entries: Vec<(u32, u32)>,
}

impl IncidenceMatrix {
    pub fn column_sum(&self, edge: usize) -> usize {
        self.entries.iter().filter(|(_, e)| *e as usize == edge).count()
    }

    pub fn row_sum(&self, vertex: usize) -> usize {
        self.entries.iter().filter(|(v, _)| *v as usize == vertex).count()
    }
}

/// Immutable weighted hypergraph with adjacency and a content fingerprint.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    vertices: Vec<Vertex>,
    edges: Vec<Hyperedge>,
    /// Edge indices incident to each vertex, ascending.
    incident: Vec<Vec<u32>>,
    /// Start of each kind block in `vertices` plus a final end sentinel.
    block_starts: [usize; 6],
    index: HashMap<String, usize>,
    fingerprint: u64,
}

fn index_key(kind: VertexKind, key: &str) -> String {
    format!("{}\u{1f}{key}", kind as u8)
}

impl Hypergraph {
    pub fn empty() -> Self {
        Hypergraph {
            vertices: Vec::new(),
            edges: Vec::new(),
            incident: Vec::new(),
            block_starts: [0; 6],
            index: HashMap::new(),
            fingerprint: Fnv1a::new().finish(),
        }
    }

    /// Build the graph from a training table, catalog, and tag table with the
    /// given edge families enabled. The user-track family is mandatory;
    /// ablation may remove only the other three. Any trained track missing
    /// from the catalog aborts the build. Vertices are dense-indexed in kind
    /// blocks (users, tracks, albums, artists, tags), first-seen order.
    pub fn build(
        train: &InteractionTable,
        catalog: &Catalog,
        tags: &TagTable,
        enabled: EdgeKindSet,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::validation("cannot build a graph from an empty training table"));
        }
        if !enabled.contains(EdgeKind::UserTrack) {
            return Err(Error::validation(
                "the user-track edge family (e1) is mandatory and cannot be disabled",
            ));
        }
        for row in train.rows() {
            if catalog.lookup(&row.track).is_none() {
                return Err(Error::Lookup(format!(
                    "track {:?} appears in training data but not in the catalog; \
                     every trained track needs an artist entry",
                    row.track
                )));
            }
        }

        let mut g = Hypergraph::empty();

        // Vertex blocks, one kind at a time so dense indices stay contiguous.
        for (user, _) in train.by_user() {
            g.intern(VertexKind::User, user);
        }
        g.seal_block(VertexKind::User);
        for row in train.rows() {
            g.intern(VertexKind::Track, &row.track);
        }
        g.seal_block(VertexKind::Track);

        let track_block = g.block_starts[VertexKind::Track as usize]
            ..g.block_starts[VertexKind::Track as usize + 1];
        let n_tracks = track_block.len();
        let track_key = |g: &Hypergraph, local: usize| {
            g.vertices[track_block.start + local].key.clone()
        };

        // Total training plays per track (weights for e3/e4 members).
        let mut plays = vec![0u64; n_tracks];
        for row in train.rows() {
            let idx = g.lookup_index(VertexKind::Track, &row.track).unwrap();
            plays[idx - track_block.start] += row.count;
        }

        // Album / artist membership over trained tracks, in track index order.
        let mut album_members: Vec<(String, Vec<usize>)> = Vec::new();
        let mut artist_members: Vec<(String, Vec<usize>)> = Vec::new();
        {
            let mut album_slot: HashMap<String, usize> = HashMap::new();
            let mut artist_slot: HashMap<String, usize> = HashMap::new();
            for local in 0..n_tracks {
                let key = track_key(&g, local);
                let entry = catalog.lookup(&key).unwrap();
                if enabled.contains(EdgeKind::AlbumTrack) {
                    if let Some(album) = &entry.album {
                        let slot = *album_slot.entry(album.clone()).or_insert_with(|| {
                            album_members.push((album.clone(), Vec::new()));
                            album_members.len() - 1
                        });
                        album_members[slot].1.push(local);
                    }
                }
                if enabled.contains(EdgeKind::ArtistTrack) {
                    let slot = *artist_slot.entry(entry.artist.clone()).or_insert_with(|| {
                        artist_members.push((entry.artist.clone(), Vec::new()));
                        artist_members.len() - 1
                    });
                    artist_members[slot].1.push(local);
                }
            }
        }
        for (album, _) in &album_members {
            g.intern(VertexKind::Album, album);
        }
        g.seal_block(VertexKind::Album);
        for (artist, _) in &artist_members {
            g.intern(VertexKind::Artist, artist);
        }
        g.seal_block(VertexKind::Artist);
        if enabled.contains(EdgeKind::TagTrack) {
            for local in 0..n_tracks {
                for row in tags.track_tags(&track_key(&g, local)) {
                    g.intern(VertexKind::Tag, &row.tag);
                }
            }
        }
        g.seal_block(VertexKind::Tag);

        // e1: one edge per training user over their play shares.
        for (user, rows) in train.by_user() {
            let hub = g.lookup_index(VertexKind::User, user).unwrap();
            let total: u64 = rows.iter().map(|r| r.count).sum();
            let members = rows
                .iter()
                .map(|r| {
                    let v = g.lookup_index(VertexKind::Track, &r.track).unwrap();
                    (v, r.count as f64 / total as f64)
                })
                .collect();
            g.push_edge(EdgeKind::UserTrack, hub, members)?;
        }
        // e2: one edge per tagged trained track over its annotation shares.
        if enabled.contains(EdgeKind::TagTrack) {
            for local in 0..n_tracks {
                let key = track_key(&g, local);
                let rows = tags.track_tags(&key);
                if rows.is_empty() {
                    continue;
                }
                let total: u64 = rows.iter().map(|r| r.count).sum();
                let members = rows
                    .iter()
                    .map(|r| {
                        let v = g.lookup_index(VertexKind::Tag, &r.tag).unwrap();
                        (v, r.count as f64 / total as f64)
                    })
                    .collect();
                g.push_edge(EdgeKind::TagTrack, track_block.start + local, members)?;
            }
        }
        // e3/e4: per album / artist over total play shares of their tracks.
        for (kind, groups) in [
            (EdgeKind::AlbumTrack, &album_members),
            (EdgeKind::ArtistTrack, &artist_members),
        ] {
            for (hub_key, locals) in groups {
                let hub = g.lookup_index(kind.hub_kind(), hub_key).unwrap();
                let total: u64 = locals.iter().map(|&l| plays[l]).sum();
                let members = locals
                    .iter()
                    .map(|&l| (track_block.start + l, plays[l] as f64 / total as f64))
                    .collect();
                g.push_edge(kind, hub, members)?;
            }
        }

        g.fingerprint = g.compute_fingerprint();
        Ok(g)
    }

    fn intern(&mut self, kind: VertexKind, key: &str) -> usize {
        let ik = index_key(kind, key);
        if let Some(&i) = self.index.get(&ik) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(Vertex {
            kind,
            key: key.to_string(),
        });
        self.incident.push(Vec::new());
        self.index.insert(ik, i);
        i
    }

    /// Record the end of `kind`'s block (and the start of the next).
    fn seal_block(&mut self, kind: VertexKind) {
        let end = self.vertices.len();
        for b in self.block_starts.iter_mut().skip(kind as usize + 1) {
            *b = end;
        }
    }

    fn push_edge(
        &mut self,
        kind: EdgeKind,
        hub: usize,
        members: Vec<(usize, f64)>,
    ) -> Result<()> {
        if members.is_empty() {
            return Err(Error::Internal(format!(
                "refusing to emit a memberless {kind} edge (hub {})",
                self.vertices[hub].key
            )));
        }
        let sum: f64 = members.iter().map(|(_, w)| w).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::Internal(format!(
                "member weights of a {kind} edge sum to {sum}, not 1"
            )));
        }
        let e = self.edges.len() as u32;
        self.incident[hub].push(e);
        for (m, _) in &members {
            self.incident[*m].push(e);
        }
        self.edges.push(Hyperedge { kind, hub, members });
        Ok(())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn lookup_index(&self, kind: VertexKind, key: &str) -> Option<usize> {
        self.index.get(&index_key(kind, key)).copied()
    }

    pub fn vertex_index(&self, kind: VertexKind, key: &str) -> Option<usize> {
        self.lookup_index(kind, key)
    }

    /// Dense index range of one kind's block.
    pub fn kind_block(&self, kind: VertexKind) -> std::ops::Range<usize> {
        self.block_starts[kind as usize]..self.block_starts[kind as usize + 1]
    }

    pub fn incident_edges(&self, v: usize) -> &[u32] {
        &self.incident[v]
    }

    /// Sum over incident edges of this vertex's in-edge weight (hub 1,
    /// member its normalized weight).
    pub fn vertex_degree(&self, v: usize) -> Result<f64> {
        if v >= self.vertices.len() {
            return Err(Error::Lookup(format!(
                "vertex index {v} out of range (|V| = {})",
                self.vertices.len()
            )));
        }
        Ok(self.incident[v]
            .iter()
            .map(|&e| self.edges[e as usize].weight_of(v).unwrap_or(0.0))
            .sum())
    }

    /// 1 + member count of edge `e`.
    pub fn hyperedge_degree(&self, e: usize) -> Result<usize> {
        self.edges
            .get(e)
            .map(Hyperedge::degree)
            .ok_or_else(|| {
                Error::Lookup(format!(
                    "edge index {e} out of range (|E| = {})",
                    self.edges.len()
                ))
            })
    }

    /// True when every hyperedge has degree exactly 2, i.e. the structure is
    /// an ordinary graph.
    pub fn is_ordinary_graph(&self) -> bool {
        self.edges.iter().all(|e| e.degree() == 2)
    }

    /// 0/1 incidence in coordinate-list form; entry (v, e) present iff v is
    /// hub or member of e.
    pub fn incidence_matrix(&self) -> IncidenceMatrix {
        let mut entries = Vec::new();
        for (e, edge) in self.edges.iter().enumerate() {
            entries.push((edge.hub as u32, e as u32));
            for (m, _) in &edge.members {
                entries.push((*m as u32, e as u32));
            }
        }
        IncidenceMatrix {
            rows: self.vertices.len(),
            cols: self.edges.len(),
            entries,
        }
    }

    pub fn edge_count_of_kind(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Content fingerprint: hashes kinds, keys, topology, and exact weight
    /// bits, so any change to the graph changes the value.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn compute_fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u32(self.vertices.len() as u32);
        for v in &self.vertices {
            h.write_u8(v.kind as u8);
            h.write_str(&v.key);
        }
        h.write_u32(self.edges.len() as u32);
        for e in &self.edges {
            h.write_u8(e.kind as u8);
            h.write_u32(e.hub as u32);
            h.write_u32(e.members.len() as u32);
            for (m, w) in &e.members {
                h.write_u32(*m as u32);
                h.write_f64(*w);
            }
        }
        h.finish()
    }

    pub fn save_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(GRAPH_MAGIC)?;
        binio::write_u8(w, GRAPH_VERSION)?;
        binio::write_u64(w, self.fingerprint)?;
        binio::write_u32(w, self.vertices.len() as u32)?;
        for v in &self.vertices {
            binio::write_u8(w, v.kind as u8)?;
            binio::write_str(w, &v.key)?;
        }
        binio::write_u32(w, self.edges.len() as u32)?;
        for e in &self.edges {
            binio::write_u8(w, e.kind as u8)?;
            binio::write_u32(w, e.hub as u32)?;
            binio::write_u32(w, e.members.len() as u32)?;
            for (m, weight) in &e.members {
                binio::write_u32(w, *m as u32)?;
                binio::write_f64(w, *weight)?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        let f = File::create(p).map_err(|e| Error::io(p, e))?;
        let mut w = BufWriter::new(f);
        self.save_to(&mut w).map_err(|e| Error::io(p, e))
    }

    /// Assemble a graph from explicit vertices and `(kind, hub, members)`
    /// edges, enforcing the same invariants `build` guarantees: vertices in
    /// kind-block order without duplicates, indices in range, and member
    /// weights summing to 1. Useful for fixtures and tools that need precise
    /// control over edge weights.
    pub fn from_parts(
        vertices: Vec<Vertex>,
        edges: Vec<(EdgeKind, usize, Vec<(usize, f64)>)>,
    ) -> Result<Self> {
        let mut g = Hypergraph::empty();
        let mut last_kind = 0u8;
        for (i, v) in vertices.iter().enumerate() {
            if (v.kind as u8) < last_kind {
                return Err(Error::Validation(format!(
                    "vertex {i} ({}, {:?}) breaks kind-block order",
                    v.kind, v.key
                )));
            }
            last_kind = v.kind as u8;
            let at = g.intern(v.kind, &v.key);
            if at != i {
                return Err(Error::Validation(format!(
                    "duplicate vertex ({}, {:?})",
                    v.kind, v.key
                )));
            }
        }
        for kind in VertexKind::ALL {
            let end = g
                .vertices
                .iter()
                .position(|v| v.kind > kind)
                .unwrap_or(g.vertices.len());
            for b in g.block_starts.iter_mut().skip(kind as usize + 1) {
                *b = end;
            }
        }
        for (kind, hub, members) in edges {
            if hub >= g.vertices.len() {
                return Err(Error::Validation(format!("edge hub index {hub} out of range")));
            }
            if let Some((m, _)) = members.iter().find(|(m, _)| *m >= g.vertices.len()) {
                return Err(Error::Validation(format!("edge member index {m} out of range")));
            }
            g.push_edge(kind, hub, members)
                .map_err(|e| Error::Validation(format!("invalid edge: {e}")))?;
        }
        g.fingerprint = g.compute_fingerprint();
        Ok(g)
    }

    pub fn load_from<R: Read>(r: &mut R, path: &str) -> Result<Self> {
        binio::expect_magic(r, GRAPH_MAGIC, path)?;
        let version = binio::read_u8(r, path)?;
        if version != GRAPH_VERSION {
            return Err(Error::Format {
                path: path.to_string(),
                msg: format!("unsupported graph format version {version}"),
            });
        }
        let stored_fp = binio::read_u64(r, path)?;
        let n_vertices = binio::read_u32(r, path)? as usize;
        let mut g = Hypergraph::empty();
        let mut last_kind = 0u8;
        for i in 0..n_vertices {
            let kind_b = binio::read_u8(r, path)?;
            let kind = VertexKind::from_u8(kind_b).ok_or_else(|| Error::Format {
                path: path.to_string(),
                msg: format!("bad vertex kind byte {kind_b}"),
            })?;
            if kind_b < last_kind {
                return Err(Error::Format {
                    path: path.to_string(),
                    msg: "vertex kinds out of block order".to_string(),
                });
            }
            last_kind = kind_b;
            let key = binio::read_str(r, path)?;
            let at = g.intern(kind, &key);
            if at != i {
                return Err(Error::Format {
                    path: path.to_string(),
                    msg: format!("duplicate vertex ({kind}, {key:?})"),
                });
            }
        }
        // Recompute block boundaries from the (validated) kind ordering.
        for kind in VertexKind::ALL {
            let end = g
                .vertices
                .iter()
                .position(|v| v.kind > kind)
                .unwrap_or(g.vertices.len());
            for b in g.block_starts.iter_mut().skip(kind as usize + 1) {
                *b = end;
            }
        }
        let n_edges = binio::read_u32(r, path)? as usize;
        for _ in 0..n_edges {
            let kind_b = binio::read_u8(r, path)?;
            let kind = EdgeKind::from_u8(kind_b).ok_or_else(|| Error::Format {
                path: path.to_string(),
                msg: format!("bad edge kind byte {kind_b}"),
            })?;
            let hub = binio::read_u32(r, path)? as usize;
            let n_members = binio::read_u32(r, path)? as usize;
            let mut members = Vec::with_capacity(n_members);
            for _ in 0..n_members {
                let m = binio::read_u32(r, path)? as usize;
                let w = binio::read_f64(r, path)?;
                if m >= g.vertices.len() {
                    return Err(Error::Format {
                        path: path.to_string(),
                        msg: format!("edge member index {m} out of range"),
                    });
                }
                members.push((m, w));
            }
            if hub >= g.vertices.len() {
                return Err(Error::Format {
                    path: path.to_string(),
                    msg: format!("edge hub index {hub} out of range"),
                });
            }
            g.push_edge(kind, hub, members).map_err(|e| Error::Format {
                path: path.to_string(),
                msg: format!("invalid edge: {e}"),
            })?;
        }
        g.fingerprint = g.compute_fingerprint();
        if g.fingerprint != stored_fp {
            return Err(Error::Format {
                path: path.to_string(),
                msg: format!(
                    "stored fingerprint {stored_fp:016x} does not match content \
                     {:016x}; file is corrupt",
                    g.fingerprint
                ),
            });
        }
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let f = File::open(p).map_err(|e| Error::io(p, e))?;
        Self::load_from(&mut BufReader::new(f), &p.display().to_string())
    }

    /// Debug dump: one JSON object per edge with kind, hub key, and member
    /// (key, weight) pairs.
    pub fn dump_edges_jsonl<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for e in &self.edges {
            let members: Vec<serde_json::Value> = e
                .members
                .iter()
                .map(|(m, weight)| {
                    serde_json::json!([self.vertices[*m].key, weight])
                })
                .collect();
            let line = serde_json::json!({
                "kind": e.kind.code(),
                "hub": self.vertices[e.hub].key,
                "members": members,
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
