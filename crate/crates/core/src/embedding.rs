//! Skip-gram-with-negative-sampling embeddings over the walk corpus.
//!
//! Vertices act as words and walks as sentences. Training enumerates every
//! (center, context) pair within a fixed window radius, draws negatives from
//! the corpus unigram distribution raised to the 3/4 power, and applies the
//! classic SGD update with a linearly decaying learning rate.
//!
//! Two execution modes: a deterministic single-worker path (the contract for
//! all reproducibility guarantees) and, with the `parallel` feature, a
//! lock-free multi-worker path whose benign races trade determinism for
//! speed. Both paths use interpolated σ / log σ lookup tables in the hot
//! loop; [`sgns_pair_loss`] uses exact overflow-safe math and is
//! gradient-checked against central differences.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use rand::Rng;

use crate::binio;
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex, VertexKind};
use crate::rng::{self, purpose};
use crate::sampling::AliasTable;
use crate::walker::WalkCorpus;

const EMB_MAGIC: &[u8; 8] = b"HRECEMB1";
const EMB_VERSION: u8 = 1;
const MIN_LR_FRACTION: f64 = 1e-4;
const NOISE_POWER: f64 = 0.75;

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingConfig {
    /// Vector dimension.
    pub dim: usize,
    /// Context window radius; all pairs within it are used (no random
    /// shrink — walks have no sentence-boundary semantics to soften).
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub seed: u64,
    /// 1 → deterministic sequential SGD; >1 → lock-free parallel SGD
    /// (requires the `parallel` feature, not deterministic).
    pub workers: usize,
    /// Frequent-token subsampling threshold, off by default: walk corpora
    /// are already frequency-shaped by the graph. When set, the learning
    /// rate still decays over the unsubsampled pair count.
    pub subsample: Option<f64>,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dim: 50,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
            seed: 42,
            workers: 1,
            subsample: None,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::validation("embedding dimension must be ≥ 1"));
        }
        if self.window < 1 {
            return Err(Error::validation("window radius must be ≥ 1"));
        }
        if self.negatives < 1 {
            return Err(Error::validation("negative sample count must be ≥ 1"));
        }
        if self.epochs < 1 {
            return Err(Error::validation("epoch count must be ≥ 1"));
        }
        if !(self.initial_learning_rate > 0.0 && self.initial_learning_rate.is_finite()) {
            return Err(Error::validation("initial learning rate must be positive"));
        }
        if self.workers < 1 {
            return Err(Error::validation("worker count must be ≥ 1"));
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::validation("subsample threshold must be positive"));
            }
        }
        Ok(())
    }
}

/// Trained vectors plus the vertex naming needed to use them downstream.
/// `input` rows are the representation consumed by the ranker; `output`
/// (context) rows exist so training can resume exactly and round-trip.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    graph_fingerprint: u64,
    vertices: Vec<Vertex>,
    index: HashMap<String, usize>,
    input: Vec<f64>,
    output: Vec<f64>,
}

/// Per-epoch mean loss and pair accounting from one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    pub epoch_loss: Vec<f64>,
    pub pairs_per_epoch: u64,
    pub total_pairs: u64,
}

fn vertex_index_key(kind: VertexKind, key: &str) -> String {
    format!("{}\u{1f}{key}", kind as u8)
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn graph_fingerprint(&self) -> u64 {
        self.graph_fingerprint
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// The downstream representation of vertex `i`.
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output_vector(&self, i: usize) -> &[f64] {
        &self.output[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index_of(&self, kind: VertexKind, key: &str) -> Option<usize> {
        self.index.get(&vertex_index_key(kind, key)).copied()
    }

    /// Refuse to pair these vectors with a graph they were not trained on.
    pub fn verify_graph(&self, g: &Hypergraph) -> Result<()> {
        if self.graph_fingerprint != g.fingerprint() {
            return Err(Error::Fingerprint {
                expected: self.graph_fingerprint,
                found: g.fingerprint(),
                hint: "the embeddings were trained on a different graph; \
                       re-run the train stage"
                    .to_string(),
            });
        }
        Ok(())
    }

    /// Assemble a table from raw rows. `input` and `output` are row-major
    /// `vertices.len() x dim` matrices; panics if the shapes disagree.
    pub fn from_parts(
        dim: usize,
        graph_fingerprint: u64,
        vertices: Vec<Vertex>,
        input: Vec<f64>,
        output: Vec<f64>,
    ) -> Self {
        assert_eq!(input.len(), vertices.len() * dim, "input matrix shape mismatch");
        assert_eq!(output.len(), vertices.len() * dim, "output matrix shape mismatch");
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (vertex_index_key(v.kind, &v.key), i))
            .collect();
        EmbeddingTable {
            dim,
            graph_fingerprint,
            vertices,
            index,
            input,
            output,
        }
    }

    pub fn save_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(EMB_MAGIC)?;
        binio::write_u8(w, EMB_VERSION)?;
        binio::write_u64(w, self.graph_fingerprint)?;
        binio::write_u32(w, self.vertices.len() as u32)?;
        binio::write_u32(w, self.dim as u32)?;
        for v in &self.vertices {
            binio::write_u8(w, v.kind as u8)?;
            binio::write_str(w, &v.key)?;
        }
        for x in &self.input {
            binio::write_f64(w, *x)?;
        }
        for x in &self.output {
            binio::write_f64(w, *x)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let p = path.as_ref();
        let f = File::create(p).map_err(|e| Error::io(p, e))?;
        let mut w = BufWriter::new(f);
        self.save_to(&mut w).map_err(|e| Error::io(p, e))
    }

    pub fn load_from<R: Read>(r: &mut R, path: &str) -> Result<Self> {
        binio::expect_magic(r, EMB_MAGIC, path)?;
        let version = binio::read_u8(r, path)?;
        if version != EMB_VERSION {
            return Err(Error::Format {
                path: path.to_string(),
                msg: format!("unsupported embedding format version {version}"),
            });
        }
        let graph_fingerprint = binio::read_u64(r, path)?;
        let n = binio::read_u32(r, path)? as usize;
        let dim = binio::read_u32(r, path)? as usize;
        if dim == 0 {
            return Err(Error::Format {
                path: path.to_string(),
                msg: "embedding dimension 0 in header".to_string(),
            });
        }
        let mut vertices = Vec::with_capacity(n);
        for _ in 0..n {
            let kind_b = binio::read_u8(r, path)?;
            let kind = VertexKind::ALL
                .get(kind_b as usize)
                .copied()
                .ok_or_else(|| Error::Format {
                    path: path.to_string(),
                    msg: format!("bad vertex kind byte {kind_b}"),
                })?;
            let key = binio::read_str(r, path)?;
            vertices.push(Vertex { kind, key });
        }
        let cells = n
            .checked_mul(dim)
            .ok_or_else(|| Error::Format {
                path: path.to_string(),
                msg: "vertex count × dimension overflows".to_string(),
            })?;
        let mut input = Vec::with_capacity(cells);
        for _ in 0..cells {
            input.push(binio::read_f64(r, path)?);
        }
        let mut output = Vec::with_capacity(cells);
        for _ in 0..cells {
            output.push(binio::read_f64(r, path)?);
        }
        // The row count and dimension in the header must account for the
        // whole payload — anything left over means they disagree.
        let mut probe = [0u8; 1];
        match r.read(&mut probe) {
            Ok(0) => {}
            Ok(_) => {
                return Err(Error::Format {
                    path: path.to_string(),
                    msg: "trailing data after embedding matrices; header row \
                          count or dimension is wrong"
                        .to_string(),
                })
            }
            Err(e) => return Err(Error::io(path, e)),
        }
        Ok(EmbeddingTable::from_parts(
            dim,
            graph_fingerprint,
            vertices,
            input,
            output,
        ))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let f = File::open(p).map_err(|e| Error::io(p, e))?;
        Self::load_from(&mut BufReader::new(f), &p.display().to_string())
    }

    /// Human-readable export: one `kind:key v1 … vs` line per vertex
    /// (input rows only).
    pub fn export_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            write!(w, "{}:{}", v.kind, v.key)?;
            for x in self.vector(i) {
                write!(w, " {x}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// σ / log σ: exact overflow-safe forms plus interpolated hot-path tables.
// ---------------------------------------------------------------------------

/// Exact σ(x) computed without overflow for any finite x.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Exact log σ(x) computed without overflow for any finite x.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

const SIG_CELLS: usize = 8192;
const SIG_MAX: f64 = 8.0;

struct SigTables {
    sig: Vec<f64>,
    log_sig: Vec<f64>,
}

fn sig_tables() -> &'static SigTables {
    static TABLES: OnceLock<SigTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut sig = Vec::with_capacity(SIG_CELLS + 1);
        let mut log_sig = Vec::with_capacity(SIG_CELLS + 1);
        for i in 0..=SIG_CELLS {
            let x = -SIG_MAX + 2.0 * SIG_MAX * i as f64 / SIG_CELLS as f64;
            sig.push(sigmoid(x));
            log_sig.push(log_sigmoid(x));
        }
        SigTables { sig, log_sig }
    })
}

#[inline]
fn lerp(table: &[f64], x: f64) -> f64 {
    let t = (x + SIG_MAX) * (SIG_CELLS as f64 / (2.0 * SIG_MAX));
    let i = t as usize;
    if i >= SIG_CELLS {
        return table[SIG_CELLS];
    }
    let frac = t - i as f64;
    table[i] + frac * (table[i + 1] - table[i])
}

/// Interpolated σ for the training loop: exact at grid nodes, < 1e-7 error
/// inside [−8, 8], clamped to the boundary values outside (where gradients
/// are vanishing anyway).
#[inline]
pub fn fast_sigmoid(x: f64) -> f64 {
    if x <= -SIG_MAX {
        sig_tables().sig[0]
    } else if x >= SIG_MAX {
        *sig_tables().sig.last().unwrap()
    } else {
        lerp(&sig_tables().sig, x)
    }
}

/// Interpolated log σ; below −8 it extends linearly with slope 1, the exact
/// asymptote of log σ.
#[inline]
pub fn fast_log_sigmoid(x: f64) -> f64 {
    if x <= -SIG_MAX {
        sig_tables().log_sig[0] + (x + SIG_MAX)
    } else if x >= SIG_MAX {
        *sig_tables().log_sig.last().unwrap()
    } else {
        lerp(&sig_tables().log_sig, x)
    }
}

/// Dot product with four independent accumulators in a fixed summation
/// order: deterministic on every machine, but free of the serial
/// floating-point dependency chain that keeps a naive sum latency-bound.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    for (xa, xb) in a.chunks_exact(4).zip(b.chunks_exact(4)) {
        acc[0] += xa[0] * xb[0];
        acc[1] += xa[1] * xb[1];
        acc[2] += xa[2] * xb[2];
        acc[3] += xa[3] * xb[3];
    }
    let mut tail = 0.0;
    for (xa, xb) in a
        .chunks_exact(4)
        .remainder()
        .iter()
        .zip(b.chunks_exact(4).remainder())
    {
        tail += xa * xb;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Loss and analytic gradients for one skip-gram pair with negatives, in the
/// exact (non-interpolated) formulation:
/// loss = −log σ(u·v) − Σ log σ(−u·vⁿ).
#[derive(Debug, Clone, PartialEq)]
pub struct PairLoss {
    pub loss: f64,
    pub grad_center: Vec<f64>,
    pub grad_context: Vec<f64>,
    pub grad_negatives: Vec<Vec<f64>>,
}

pub fn sgns_pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairLoss {
    let s = center.len();
    debug_assert_eq!(context.len(), s);
    let pos_dot = dot(center, context);
    let pos_sig = sigmoid(pos_dot);
    let mut loss = -log_sigmoid(pos_dot);
    // ∂loss/∂u = −(1−σ(u·v))·v + Σ σ(u·vⁿ)·vⁿ ; ∂loss/∂v = −(1−σ(u·v))·u.
    let mut grad_center: Vec<f64> = context.iter().map(|x| -(1.0 - pos_sig) * x).collect();
    let grad_context: Vec<f64> = center.iter().map(|x| -(1.0 - pos_sig) * x).collect();
    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for neg in negatives {
        debug_assert_eq!(neg.len(), s);
        let d = dot(center, neg);
        loss -= log_sigmoid(-d);
        let sig = sigmoid(d);
        for (g, x) in grad_center.iter_mut().zip(*neg) {
            *g += sig * x;
        }
        grad_negatives.push(center.iter().map(|x| sig * x).collect());
    }
    PairLoss {
        loss,
        grad_center,
        grad_context,
        grad_negatives,
    }
}

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

fn pairs_in_walk(len: usize, window: usize) -> u64 {
    let mut pairs = 0u64;
    for c in 0..len {
        let lo = c.saturating_sub(window);
        let hi = (c + window).min(len.saturating_sub(1));
        pairs += (hi - lo) as u64; // window minus the center itself
    }
    if len == 0 {
        0
    } else {
        pairs
    }
}

/// Corpus-frequency noise table (unigram^(3/4)) plus per-token keep
/// probabilities when subsampling is enabled.
fn noise_and_keep(
    corpus: &WalkCorpus,
    n_vertices: usize,
    subsample: Option<f64>,
) -> Result<(AliasTable, Option<Vec<f64>>)> {
    let mut freq = vec![0u64; n_vertices];
    let mut total = 0u64;
    for walk in &corpus.walks {
        for &v in walk {
            let v = v as usize;
            if v >= n_vertices {
                return Err(Error::validation(format!(
                    "corpus references vertex {v} but the graph has only {n_vertices} vertices"
                )));
            }
            freq[v] += 1;
            total += 1;
        }
    }
    let noise = AliasTable::new(&freq.iter().map(|&f| (f as f64).powf(NOISE_POWER)).collect::<Vec<_>>());
    let keep = subsample.map(|t| {
        freq.iter()
            .map(|&f| {
                if f == 0 {
                    1.0
                } else {
                    let frac = f as f64 / total as f64;
                    (((frac / t).sqrt() + 1.0) * t / frac).min(1.0)
                }
            })
            .collect()
    });
    Ok((noise, keep))
}

struct TrainJob<'a> {
    walks: &'a [Vec<u32>],
    dim: usize,
    window: usize,
    negatives: usize,
    epochs: usize,
    lr0: f64,
    total_pairs: u64,
    noise: &'a AliasTable,
    keep: Option<&'a [f64]>,
}

/// Deterministic sequential SGD over `walks`; the shared word2vec update
/// scheme: accumulate the center gradient while updating context rows with
/// the original center vector, then apply the center update once.
#[allow(clippy::too_many_arguments)]
fn train_single(
    job: &TrainJob<'_>,
    input: &mut [f64],
    output: &mut [f64],
    rng: &mut rand_chacha::ChaCha8Rng,
    processed: &mut u64,
) -> Vec<f64> {
    let s = job.dim;
    let mut gu = vec![0.0f64; s];
    let mut kept: Vec<u32> = Vec::new();
    let mut epoch_loss = Vec::with_capacity(job.epochs);
    for _ in 0..job.epochs {
        let mut loss_sum = 0.0f64;
        let mut loss_pairs = 0u64;
        for walk in job.walks {
            let tokens: &[u32] = match job.keep {
                None => walk,
                Some(keep) => {
                    kept.clear();
                    kept.extend(
                        walk.iter()
                            .copied()
                            .filter(|&v| rng.random::<f64>() < keep[v as usize]),
                    );
                    &kept
                }
            };
            for c in 0..tokens.len() {
                let center = tokens[c] as usize;
                let lo = c.saturating_sub(job.window);
                let hi = (c + job.window).min(tokens.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == c {
                        continue;
                    }
                    let context = tokens[ctx_pos] as usize;
                    let lr = job.lr0
                        * (1.0 - *processed as f64 / job.total_pairs as f64)
                            .max(MIN_LR_FRACTION);
                    *processed += 1;

                    let iu = center * s;
                    let u = &mut input[iu..iu + s];
                    gu.fill(0.0);
                    // Positive update.
                    let iv = context * s;
                    let v = &mut output[iv..iv + s];
                    let d = dot(u, v);
                    loss_sum -= fast_log_sigmoid(d);
                    let g = lr * (1.0 - fast_sigmoid(d));
                    for ((gi, vi), ui) in gu.iter_mut().zip(v.iter_mut()).zip(u.iter()) {
                        *gi += g * *vi;
                        *vi += g * *ui;
                    }
                    // Negatives: draws equal to the configured count, with
                    // any draw that hits the positive context skipped.
                    for _ in 0..job.negatives {
                        let Some(neg) = job.noise.sample(rng) else {
                            break;
                        };
                        if neg == context {
                            continue;
                        }
                        let ivn = neg * s;
                        let vn = &mut output[ivn..ivn + s];
                        let dn = dot(u, vn);
                        loss_sum -= fast_log_sigmoid(-dn);
                        let gn = -lr * fast_sigmoid(dn);
                        for ((gi, vi), ui) in gu.iter_mut().zip(vn.iter_mut()).zip(u.iter()) {
                            *gi += gn * *vi;
                            *vi += gn * *ui;
                        }
                    }
                    for (ui, gi) in u.iter_mut().zip(gu.iter()) {
                        *ui += *gi;
                    }
                    loss_pairs += 1;
                }
            }
        }
        epoch_loss.push(if loss_pairs == 0 {
            0.0
        } else {
            loss_sum / loss_pairs as f64
        });
    }
    epoch_loss
}

#[cfg(feature = "parallel")]
mod hogwild {
    use super::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    #[inline]
    fn read_row(m: &[AtomicU64], at: usize, buf: &mut [f64]) {
        let len = buf.len();
        for (b, cell) in buf.iter_mut().zip(&m[at..at + len]) {
            *b = f64::from_bits(cell.load(Ordering::Relaxed));
        }
    }

    #[inline]
    fn add_row(m: &[AtomicU64], at: usize, scale: f64, delta: &[f64]) {
        for (cell, d) in m[at..at + delta.len()].iter().zip(delta) {
            // Benign race: concurrent read-modify-write may drop an update.
            let cur = f64::from_bits(cell.load(Ordering::Relaxed));
            cell.store((cur + scale * d).to_bits(), Ordering::Relaxed);
        }
    }

    /// Lock-free SGD: workers own contiguous walk chunks and run all their
    /// epochs without barriers; matrices are shared bit-stored atomics and
    /// the processed-pair counter driving the learning rate is global.
    pub(super) fn train(
        job: &TrainJob<'_>,
        seed: u64,
        workers: usize,
        input: Vec<f64>,
        output: Vec<f64>,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>, u64) {
        let input: Vec<AtomicU64> = input.into_iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        let output: Vec<AtomicU64> = output.into_iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        let processed = AtomicU64::new(0);
        let n_walks = job.walks.len();
        let mut per_worker: Vec<Vec<(f64, u64)>> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers {
                let chunk = &job.walks[w * n_walks / workers..(w + 1) * n_walks / workers];
                let (input, output, processed) = (&input, &output, &processed);
                handles.push(scope.spawn(move || {
                    let s = job.dim;
                    let mut rng = rng::stream(seed, &[purpose::SGNS_TRAIN, w as u64]);
                    let mut u = vec![0.0f64; s];
                    let mut v = vec![0.0f64; s];
                    let mut gu = vec![0.0f64; s];
                    let mut kept: Vec<u32> = Vec::new();
                    let mut stats = Vec::with_capacity(job.epochs);
                    for _ in 0..job.epochs {
                        let mut loss_sum = 0.0f64;
                        let mut loss_pairs = 0u64;
                        for walk in chunk {
                            let tokens: &[u32] = match job.keep {
                                None => walk,
                                Some(keep) => {
                                    kept.clear();
                                    kept.extend(walk.iter().copied().filter(|&t| {
                                        rng.random::<f64>() < keep[t as usize]
                                    }));
                                    &kept
                                }
                            };
                            for c in 0..tokens.len() {
                                let center = tokens[c] as usize;
                                let lo = c.saturating_sub(job.window);
                                let hi = (c + job.window).min(tokens.len() - 1);
                                for ctx_pos in lo..=hi {
                                    if ctx_pos == c {
                                        continue;
                                    }
                                    let context = tokens[ctx_pos] as usize;
                                    let done = processed.fetch_add(1, Ordering::Relaxed);
                                    let lr = job.lr0
                                        * (1.0 - done as f64 / job.total_pairs as f64)
                                            .max(MIN_LR_FRACTION);
                                    read_row(input, center * s, &mut u);
                                    read_row(output, context * s, &mut v);
                                    let d = dot(&u, &v);
                                    loss_sum -= fast_log_sigmoid(d);
                                    let g = lr * (1.0 - fast_sigmoid(d));
                                    gu.fill(0.0);
                                    for i in 0..s {
                                        gu[i] += g * v[i];
                                    }
                                    add_row(output, context * s, g, &u);
                                    for _ in 0..job.negatives {
                                        let Some(neg) = job.noise.sample(&mut rng) else {
                                            break;
                                        };
                                        if neg == context {
                                            continue;
                                        }
                                        read_row(output, neg * s, &mut v);
                                        let dn = dot(&u, &v);
                                        loss_sum -= fast_log_sigmoid(-dn);
                                        let gn = -lr * fast_sigmoid(dn);
                                        for i in 0..s {
                                            gu[i] += gn * v[i];
                                        }
                                        add_row(output, neg * s, gn, &u);
                                    }
                                    add_row(input, center * s, 1.0, &gu);
                                    loss_pairs += 1;
                                }
                            }
                        }
                        stats.push((loss_sum, loss_pairs));
                    }
                    stats
                }));
            }
            for h in handles {
                per_worker.push(h.join().expect("training worker panicked"));
            }
        });
        let epochs = job.epochs;
        let mut epoch_loss = vec![0.0f64; epochs];
        for e in 0..epochs {
            let (sum, cnt) = per_worker
                .iter()
                .map(|s| s[e])
                .fold((0.0, 0u64), |(a, b), (x, y)| (a + x, b + y));
            epoch_loss[e] = if cnt == 0 { 0.0 } else { sum / cnt as f64 };
        }
        let back = |m: &[AtomicU64]| {
            m.iter()
                .map(|c| f64::from_bits(c.load(Ordering::Relaxed)))
                .collect()
        };
        let total = processed.load(Ordering::Relaxed);
        (back(&input), back(&output), epoch_loss, total)
    }
}

/// Train embeddings over `corpus`, which must have been generated from `g`.
/// Input rows start uniform in [−0.5/s, +0.5/s), output rows start at zero;
/// the returned stats carry the per-epoch mean loss.
pub fn train_skipgram(
    corpus: &WalkCorpus,
    g: &Hypergraph,
    cfg: &EmbeddingConfig,
) -> Result<(EmbeddingTable, TrainStats)> {
    cfg.validate()?;
    corpus.verify_graph(g)?;
    if corpus.walks.is_empty() {
        return Err(Error::validation("cannot train on an empty walk corpus"));
    }
    let n = g.vertex_count();
    let s = cfg.dim;
    let (noise, keep) = noise_and_keep(corpus, n, cfg.subsample)?;

    let pairs_per_epoch: u64 = corpus
        .walks
        .iter()
        .map(|w| pairs_in_walk(w.len(), cfg.window))
        .sum();
    let total_pairs = pairs_per_epoch * cfg.epochs as u64;

    let mut input = vec![0.0f64; n * s];
    {
        let mut r = rng::stream(cfg.seed, &[purpose::SGNS_INIT]);
        for x in input.iter_mut() {
            *x = (r.random::<f64>() - 0.5) / s as f64;
        }
    }
    let output = vec![0.0f64; n * s];

    let workers = if cfg.workers > 1 && !cfg!(feature = "parallel") {
        log::warn!("multi-worker training requires the `parallel` feature; using one worker");
        1
    } else {
        cfg.workers
    };

    let job = TrainJob {
        walks: &corpus.walks,
        dim: s,
        window: cfg.window,
        negatives: cfg.negatives,
        epochs: cfg.epochs,
        lr0: cfg.initial_learning_rate,
        total_pairs: total_pairs.max(1),
        noise: &noise,
        keep: keep.as_deref(),
    };

    let (input, output, epoch_loss, processed) = if workers == 1 {
        let mut input = input;
        let mut output = output;
        let mut rng = rng::stream(cfg.seed, &[purpose::SGNS_TRAIN, 0]);
        let mut processed = 0u64;
        let epoch_loss = train_single(&job, &mut input, &mut output, &mut rng, &mut processed);
        (input, output, epoch_loss, processed)
    } else {
        #[cfg(feature = "parallel")]
        {
            hogwild::train(&job, cfg.seed, workers, input, output)
        }
        #[cfg(not(feature = "parallel"))]
        unreachable!("workers forced to 1 without the parallel feature")
    };

    if input.iter().chain(&output).any(|x| !x.is_finite()) {
        return Err(Error::Internal(
            "training produced a non-finite vector entry".to_string(),
        ));
    }
    let table = EmbeddingTable::from_parts(
        s,
        g.fingerprint(),
        g.vertices().to_vec(),
        input,
        output,
    );
    Ok((
        table,
        TrainStats {
            epoch_loss,
            pairs_per_epoch,
            total_pairs: processed,
        },
    ))
}
