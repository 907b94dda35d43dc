//! Weighted sampling via cumulative-sum tables with binary search, including
//! renormalized draws that exclude one index. Used for in-edge vertex
//! transitions and for the unigram^(3/4) negative-sampling distribution.

use rand::Rng;

/// Precomputed cumulative weight table over indices `0..len`.
///
/// `sample` draws index i with probability w_i / Σw; `sample_excluding(skip)`
/// draws from the same distribution renormalized after removing `skip`.
#[derive(Debug, Clone)]
pub struct CumTable {
    weights: Vec<f64>,
    cum: Vec<f64>,
}

impl CumTable {
    /// Weights must be nonnegative and finite. A table whose total mass is
    /// zero never yields a sample.
    pub fn new(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|w| w.is_finite() && *w >= 0.0));
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cum.push(acc);
        }
        CumTable { weights, cum }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// First index whose cumulative mass exceeds `target`, skipping
    /// zero-weight entries that a boundary hit could otherwise select.
    fn locate(&self, target: f64) -> usize {
        let mut i = self.cum.partition_point(|c| *c <= target);
        if i >= self.weights.len() {
            i = self.weights.len() - 1;
        }
        // Boundary floats can land on an empty interval; walk to mass.
        while self.weights[i] == 0.0 && i > 0 {
            i -= 1;
        }
        while self.weights[i] == 0.0 && i + 1 < self.weights.len() {
            i += 1;
        }
        i
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        let total = self.total();
        if total <= 0.0 {
            return None;
        }
        Some(self.locate(rng.random::<f64>() * total))
    }

    /// Draw proportionally to weights with index `skip` removed and the rest
    /// renormalized. Returns `None` when no mass remains outside `skip`.
    pub fn sample_excluding<R: Rng>(&self, skip: usize, rng: &mut R) -> Option<usize> {
        let w_skip = self.weights[skip];
        let rem = self.total() - w_skip;
        if rem <= 0.0 {
            return None;
        }
        let r = rng.random::<f64>() * rem;
        // Mass strictly below `skip`; draws at or above it shift past it.
        let below = self.cum[skip] - w_skip;
        let target = if r < below { r } else { r + w_skip };
        let mut i = self.locate(target);
        if i == skip {
            // Float boundary landed on the excluded interval; move to the
            // nearest index carrying mass.
            i = (0..self.weights.len())
                .filter(|&j| j != skip && self.weights[j] > 0.0)
                .min_by(|&a, &b| {
                    let da = a.abs_diff(skip);
                    let db = b.abs_diff(skip);
                    da.cmp(&db)
                })?;
        }
        Some(i)
    }
}

/// Constant-time weighted sampler (Vose's alias method).
///
/// Draws index i with probability w_i / Σw — the same distribution as
/// [`CumTable::sample`] — but each draw costs O(1) instead of a binary
/// search, which matters on hot paths that take hundreds of millions of
/// draws. Construction is O(n) and deterministic for a given weight vector.
#[derive(Debug, Clone)]
pub struct AliasTable {
    /// Probability of keeping the uniformly drawn slot's own index.
    accept: Vec<f64>,
    /// Fallback index used when the slot rejects.
    alias: Vec<u32>,
    has_mass: bool,
}

impl AliasTable {
    /// Weights must be nonnegative and finite. A table whose total mass is
    /// zero never yields a sample.
    pub fn new(weights: &[f64]) -> Self {
        debug_assert!(weights.iter().all(|w| w.is_finite() && *w >= 0.0));
        debug_assert!(weights.len() <= u32::MAX as usize);
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        if n == 0 || total <= 0.0 {
            return AliasTable { accept: vec![0.0; n], alias: (0..n as u32).collect(), has_mass: false };
        }
        let scale = n as f64 / total;
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let mut accept = vec![1.0f64; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        // Deficit slots pair with surplus slots; stacks are filled in index
        // order so the construction is reproducible.
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, s) in scaled.iter().enumerate() {
            if *s < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            accept[s as usize] = scaled[s as usize];
            alias[s as usize] = l;
            let rest = (scaled[l as usize] + scaled[s as usize]) - 1.0;
            scaled[l as usize] = rest;
            if rest < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Whatever stack drains last holds slots whose residue is 1 up to
        // float error; they keep their own index.
        for l in large {
            accept[l as usize] = 1.0;
        }
        for s in small {
            accept[s as usize] = 1.0;
        }
        AliasTable { accept, alias, has_mass: true }
    }

    pub fn len(&self) -> usize {
        self.accept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accept.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        if !self.has_mass {
            return None;
        }
        let slot = rng.random_range(0..self.accept.len());
        if rng.random::<f64>() < self.accept[slot] {
            Some(slot)
        } else {
            Some(self.alias[slot] as usize)
        }
    }
}
