//! Random-walk corpus generation over the hypergraph.
//!
//! Each walk holds a current hyperedge. Per step the walker keeps that edge
//! with probability `stay_probability`, otherwise re-draws uniformly among
//! the current vertex's incident edges (possibly landing on the same one),
//! and then moves to another vertex of the chosen edge with probability
//! proportional to in-edge weights (hub 1, members their normalized
//! weights), the current vertex excluded. Walks for distinct (start vertex,
//! iteration) pairs use independent counter-derived RNG streams, so the
//! corpus is identical no matter how the work is scheduled.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexKindSet};
use crate::parallel::*;
use crate::rng::{self, purpose};
use crate::sampling::CumTable;

const CORPUS_HEADER: &str = "#hyperrec-corpus v1";
/// Edge re-draws tolerated before a step aborts; unreachable in practice
/// because every edge has at least two vertices with positive weight.
const MAX_EDGE_ATTEMPTS: usize = 64;

/// Walk generation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Walks started per start vertex.
    pub iterations: u32,
    /// Vertices per walk (so transitions per walk is one less).
    pub length: u32,
    pub stay_probability: f64,
    pub seed: u64,
    pub start_kinds: VertexKindSet,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            iterations: 5,
            length: 200,
            stay_probability: 0.5,
            seed: 42,
            start_kinds: VertexKindSet::all(),
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::validation("walk iterations must be ≥ 1"));
        }
        if self.length < 1 {
            return Err(Error::validation("walk length must be ≥ 1"));
        }
        if !(0.0..=1.0).contains(&self.stay_probability) {
            return Err(Error::validation(format!(
                "stay probability must lie in [0,1], got {}",
                self.stay_probability
            )));
        }
        Ok(())
    }
}

/// Generated walks plus the provenance needed to validate downstream use.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<u32>>,
    pub graph_fingerprint: u64,
    pub config: WalkConfig,
}

impl WalkCorpus {
    /// Refuse to pair this corpus with a graph it was not generated from.
    pub fn verify_graph(&self, g: &Hypergraph) -> Result<()> {
        if self.graph_fingerprint != g.fingerprint() {
            return Err(Error::Fingerprint {
                expected: self.graph_fingerprint,
                found: g.fingerprint(),
                hint: "the walk corpus was generated from a different graph; \
                       re-run the walk stage"
                    .to_string(),
            });
        }
        Ok(())
    }

    pub fn save_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "{CORPUS_HEADER} graph={:016x} r={} k={} stay={} seed={} starts={}",
            self.graph_fingerprint,
            self.config.iterations,
            self.config.length,
            self.config.stay_probability,
            self.config.seed,
            self.config.start_kinds,
        )?;
        for walk in &self.walks {
            let mut first = true;
            for v in walk {
                if !first {
                    w.write_all(b" ")?;
                }
                write!(w, "{v}")?;
                first = false;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        let f = File::create(p).map_err(|e| Error::io(p, e))?;
        let mut w = BufWriter::new(f);
        self.save_to(&mut w).map_err(|e| Error::io(p, e))
    }

    pub fn load_from<R: BufRead>(r: R, path: &str) -> Result<Self> {
        let bad = |msg: String| Error::Format {
            path: path.to_string(),
            msg,
        };
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad("empty corpus file".to_string()))?
            .map_err(|e| Error::io(path, e))?;
        let rest = header
            .strip_prefix(CORPUS_HEADER)
            .ok_or_else(|| bad(format!("missing {CORPUS_HEADER:?} header")))?;
        let mut fingerprint = None;
        let mut iterations = None;
        let mut length = None;
        let mut stay = None;
        let mut seed = None;
        let mut starts = None;
        for tok in rest.split_whitespace() {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed header token {tok:?}")))?;
            match key {
                "graph" => {
                    fingerprint = Some(
                        u64::from_str_radix(val, 16)
                            .map_err(|_| bad(format!("bad graph fingerprint {val:?}")))?,
                    )
                }
                "r" => iterations = Some(val.parse().map_err(|_| bad(format!("bad r {val:?}")))?),
                "k" => length = Some(val.parse().map_err(|_| bad(format!("bad k {val:?}")))?),
                "stay" => stay = Some(val.parse().map_err(|_| bad(format!("bad stay {val:?}")))?),
                "seed" => seed = Some(val.parse().map_err(|_| bad(format!("bad seed {val:?}")))?),
                "starts" => starts = Some(VertexKindSet::parse_list(val)?),
                other => return Err(bad(format!("unknown header key {other:?}"))),
            }
        }
        let config = WalkConfig {
            iterations: iterations.ok_or_else(|| bad("header lacks r".to_string()))?,
            length: length.ok_or_else(|| bad("header lacks k".to_string()))?,
            stay_probability: stay.ok_or_else(|| bad("header lacks stay".to_string()))?,
            seed: seed.ok_or_else(|| bad("header lacks seed".to_string()))?,
            start_kinds: starts.ok_or_else(|| bad("header lacks starts".to_string()))?,
        };
        let mut walks = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let walk: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(format!("line {}: bad vertex index {t:?}", i + 2))))
                .collect::<Result<_>>()?;
            if walk.len() != config.length as usize {
                return Err(bad(format!(
                    "line {}: walk has {} vertices, expected {}",
                    i + 2,
                    walk.len(),
                    config.length
                )));
            }
            walks.push(walk);
        }
        Ok(WalkCorpus {
            walks,
            graph_fingerprint: fingerprint
                .ok_or_else(|| bad("header lacks graph fingerprint".to_string()))?,
            config,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let f = File::open(p).map_err(|e| Error::io(p, e))?;
        Self::load_from(BufReader::new(f), &p.display().to_string())
    }
}

/// Reusable walk machinery over one graph: per-edge vertex lists and
/// cumulative weight tables (hub first with weight 1, then members).
pub struct Walker<'g> {
    graph: &'g Hypergraph,
    edge_vertices: Vec<Vec<usize>>,
    edge_weights: Vec<CumTable>,
}

impl<'g> Walker<'g> {
    pub fn new(graph: &'g Hypergraph) -> Self {
        let mut edge_vertices = Vec::with_capacity(graph.edge_count());
        let mut edge_weights = Vec::with_capacity(graph.edge_count());
        for e in graph.edges() {
            let mut verts = Vec::with_capacity(1 + e.members.len());
            let mut weights = Vec::with_capacity(1 + e.members.len());
            verts.push(e.hub);
            weights.push(1.0);
            for (m, w) in &e.members {
                verts.push(*m);
                weights.push(*w);
            }
            edge_vertices.push(verts);
            edge_weights.push(CumTable::new(weights));
        }
        Walker {
            graph,
            edge_vertices,
            edge_weights,
        }
    }

    /// One transition. Draw order: (1) stay/switch, (2) uniform edge index
    /// when switching, (3) weighted next vertex excluding the current one.
    /// A degenerate edge draw (no other vertex carries weight) falls back to
    /// a fresh uniform edge, a bounded number of times.
    pub fn step(
        &self,
        current_vertex: usize,
        current_edge: u32,
        cfg: &WalkConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<(usize, u32)> {
        let incident = self.graph.incident_edges(current_vertex);
        debug_assert!(incident.contains(&current_edge));
        let mut edge = current_edge;
        if rng.random::<f64>() >= cfg.stay_probability {
            edge = incident[rng.random_range(0..incident.len())];
        }
        for _ in 0..MAX_EDGE_ATTEMPTS {
            let verts = &self.edge_vertices[edge as usize];
            let table = &self.edge_weights[edge as usize];
            let here = verts.iter().position(|&v| v == current_vertex);
            if let Some(here) = here {
                if let Some(pick) = table.sample_excluding(here, rng) {
                    return Ok((verts[pick], edge));
                }
            } else {
                return Err(Error::Internal(format!(
                    "walk state corrupt: vertex {current_vertex} not on edge {edge}"
                )));
            }
            // Degenerate: nothing else on this edge carries weight.
            edge = incident[rng.random_range(0..incident.len())];
        }
        Err(Error::Internal(format!(
            "no usable incident edge found for vertex {current_vertex} after \
             {MAX_EDGE_ATTEMPTS} attempts"
        )))
    }

    /// One walk of exactly `cfg.length` vertices from `start`, which must
    /// have at least one incident edge.
    pub fn walk_from(
        &self,
        start: usize,
        cfg: &WalkConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<u32>> {
        let incident = self.graph.incident_edges(start);
        if incident.is_empty() {
            return Err(Error::Internal(format!(
                "cannot walk from isolated vertex {start}"
            )));
        }
        let mut walk = Vec::with_capacity(cfg.length as usize);
        walk.push(start as u32);
        if cfg.length == 1 {
            return Ok(walk);
        }
        let mut edge = incident[rng.random_range(0..incident.len())];
        let mut here = start;
        for _ in 1..cfg.length {
            let (next, next_edge) = self.step(here, edge, cfg, rng)?;
            walk.push(next as u32);
            here = next;
            edge = next_edge;
        }
        Ok(walk)
    }
}

/// Generate the full corpus: `iterations` walks from every non-isolated
/// vertex whose kind is in `start_kinds`, ordered by (vertex index,
/// iteration). Isolated start vertices are skipped with a warning.
pub fn generate_walks(g: &Hypergraph, cfg: &WalkConfig) -> Result<WalkCorpus> {
    cfg.validate()?;
    let walker = Walker::new(g);
    let mut starts = Vec::new();
    for v in 0..g.vertex_count() {
        if !cfg.start_kinds.contains(g.vertex(v).kind) {
            continue;
        }
        if g.incident_edges(v).is_empty() {
            log::warn!(
                "skipping isolated start vertex {} ({})",
                g.vertex(v).key,
                g.vertex(v).kind
            );
            continue;
        }
        starts.push(v);
    }
    let tasks: Vec<(usize, u32)> = starts
        .iter()
        .flat_map(|&v| (0..cfg.iterations).map(move |it| (v, it)))
        .collect();
    let walks: Vec<Vec<u32>> = tasks
        .par_iter()
        .map(|&(v, it)| {
            let mut rng = rng::stream(cfg.seed, &[purpose::WALK, v as u64, u64::from(it)]);
            walker.walk_from(v, cfg, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(WalkCorpus {
        walks,
        graph_fingerprint: g.fingerprint(),
        config: *cfg,
    })
}

/// Post-hoc corpus validity check: every walk has exactly `k` in-range
/// vertices, no immediate self-transitions, and every consecutive pair
/// shares at least one hyperedge. Returns the number of transitions checked.
pub fn check_corpus(g: &Hypergraph, corpus: &WalkCorpus) -> Result<u64> {
    let mut transitions = 0u64;
    for (i, walk) in corpus.walks.iter().enumerate() {
        if walk.len() != corpus.config.length as usize {
            return Err(Error::validation(format!(
                "walk {i} has {} vertices, expected {}",
                walk.len(),
                corpus.config.length
            )));
        }
        for pair in walk.windows(2) {
            let (a, b) = (pair[0] as usize, pair[1] as usize);
            if a >= g.vertex_count() || b >= g.vertex_count() {
                return Err(Error::validation(format!(
                    "walk {i} references a vertex outside the graph"
                )));
            }
            if a == b {
                return Err(Error::validation(format!(
                    "walk {i} contains an immediate self-transition at vertex {a}"
                )));
            }
            // Incident lists are ascending; intersect with two pointers.
            let (ea, eb) = (g.incident_edges(a), g.incident_edges(b));
            let (mut x, mut y) = (0, 0);
            let mut shared = false;
            while x < ea.len() && y < eb.len() {
                match ea[x].cmp(&eb[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        shared = true;
                        break;
                    }
                }
            }
            if !shared {
                return Err(Error::validation(format!(
                    "walk {i}: vertices {a} and {b} share no hyperedge"
                )));
            }
            transitions += 1;
        }
    }
    Ok(transitions)
}
