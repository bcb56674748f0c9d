//! Expected distances and kernels under random word translation.
//!
//! A document `x` is translated word by word, `x_i → y_i` with probability
//! `T[x_i, y_i]`, and represented by the histogram `γ(y)` of the result. With
//! `G = T Tᵀ` and count vectors `c_x`, `c_w`:
//!
//! ```text
//! E⟨γ(y), γ(z)⟩ = c_xᵀ G c_w / (N_x N_w)                       y ~ x, z ~ w independent
//! E⟨γ(y), γ(y)⟩ = (c_xᵀ G c_x - Σ_v c_v G_vv) / N_x² + 1 / N_x  same sample
//! E‖γ(y) - γ(z)‖² = E⟨γ(y),γ(y)⟩ + E⟨γ(z),γ(z)⟩ - 2 E⟨γ(y),γ(z)⟩
//! ```
//!
//! The second line is the positional double sum over `i ≠ j` rewritten on
//! counts; the `1/N` term comes from the `i = j` diagonal.
//!
//! The expected linear kernel always uses independent copies, also for
//! `x = w`, so kernel matrices are positive semidefinite.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, Histogram};
use crate::diffusion::{included_ids, TranslationModel};
use crate::error::{Error, Result};

/// `G = T Tᵀ`, block-diagonal: a dense block over the included words and
/// the identity over excluded words.
#[derive(Debug, Clone, PartialEq)]
pub struct GramModel {
    block: DMatrix<f64>,
    slot: Vec<Option<usize>>,
    excluded: BTreeSet<usize>,
    diag: Vec<f64>,
}

impl GramModel {
    pub fn from_parts(vocab_size: usize, excluded: BTreeSet<usize>, block: DMatrix<f64>) -> Result<Self> {
        if let Some(&bad) = excluded.iter().find(|&&id| id >= vocab_size) {
            return Err(Error::VocabMismatch { id: bad, size: vocab_size });
        }
        let included = included_ids(vocab_size, &excluded);
        let k = included.len();
        if block.nrows() != k || block.ncols() != k {
            return Err(Error::DimensionMismatch { expected: k, found: block.nrows() });
        }
        let mut slot = vec![None; vocab_size];
        for (i, &id) in included.iter().enumerate() {
            slot[id] = Some(i);
        }
        let diag = (0..vocab_size)
            .map(|u| slot[u].map_or(1.0, |i| block[(i, i)]))
            .collect();
        Ok(Self { block, slot, excluded, diag })
    }

    pub fn identity(vocab_size: usize) -> Self {
        Self::from_parts(vocab_size, BTreeSet::new(), DMatrix::identity(vocab_size, vocab_size))
            .expect("identity gram is well formed")
    }

    pub fn vocab_size(&self) -> usize {
        self.slot.len()
    }

    pub fn block(&self) -> &DMatrix<f64> {
        &self.block
    }

    pub fn excluded(&self) -> &BTreeSet<usize> {
        &self.excluded
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn entry(&self, u: usize, v: usize) -> f64 {
        match (self.slot[u], self.slot[v]) {
            (Some(i), Some(j)) => self.block[(i, j)],
            _ if u == v => 1.0,
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.vocab_size();
        DMatrix::from_fn(m, m, |u, v| self.entry(u, v))
    }

    fn check(&self, h: &Histogram) -> Result<()> {
        if h.max_id() >= self.vocab_size() {
            return Err(Error::VocabMismatch { id: h.max_id(), size: self.vocab_size() });
        }
        Ok(())
    }

    /// `c_xᵀ G c_w`.
    fn bilinear(&self, x: &Histogram, w: &Histogram) -> f64 {
        let mut acc = 0.0;
        for (&u, &cu) in x.counts() {
            let mut row = 0.0;
            for (&v, &cv) in w.counts() {
                row += cv as f64 * self.entry(u, v);
            }
            acc += cu as f64 * row;
        }
        acc
    }
}

/// `G = T Tᵀ`, computed once and mirrored so it is exactly symmetric.
pub fn precompute_gram(t: &TranslationModel) -> GramModel {
    let b = t.block();
    let k = b.nrows();
    let mut g = b * b.transpose();
    for i in 0..k {
        for j in (i + 1)..k {
            g[(j, i)] = g[(i, j)];
        }
    }
    GramModel::from_parts(t.vocab_size(), t.excluded().clone(), g).expect("block shapes agree")
}

/// Orders a pair canonically so symmetric quantities are bit-identical
/// under argument swap.
fn canonical<'a>(x: &'a Histogram, w: &'a Histogram) -> (&'a Histogram, &'a Histogram) {
    if x <= w {
        (x, w)
    } else {
        (w, x)
    }
}

/// `E⟨γ(y), γ(y)⟩` for a single translated copy `y` of `x`.
pub fn expected_self_inner(x: &Histogram, gram: &GramModel) -> Result<f64> {
    gram.check(x)?;
    let n = x.total() as f64;
    let diag: f64 = x.counts().iter().map(|(&v, &c)| c as f64 * gram.diag[v]).sum();
    Ok((gram.bilinear(x, x) - diag) / (n * n) + 1.0 / n)
}

/// `E⟨γ(y), γ(z)⟩` with `y`, `z` independent translations of `x`, `w`.
pub fn expected_linear_kernel(x: &Histogram, w: &Histogram, gram: &GramModel) -> Result<f64> {
    gram.check(x)?;
    gram.check(w)?;
    let (a, b) = canonical(x, w);
    Ok(gram.bilinear(a, b) / (a.total() as f64 * b.total() as f64))
}

/// `E‖γ(y) - γ(z)‖²`.
pub fn expected_sq_l2(x: &Histogram, w: &Histogram, gram: &GramModel) -> Result<f64> {
    let sx = expected_self_inner(x, gram)?;
    let sw = expected_self_inner(w, gram)?;
    let cross = expected_linear_kernel(x, w, gram)?;
    // An expectation of a square; only rounding can make it negative.
    Ok((sx + sw - 2.0 * cross).max(0.0))
}

/// `exp(-E‖γ(y) - γ(z)‖² / σ²)`.
pub fn expected_rbf_kernel(x: &Histogram, w: &Histogram, gram: &GramModel, sigma_k: f64) -> Result<f64> {
    if !(sigma_k > 0.0) || !sigma_k.is_finite() {
        return Err(Error::InvalidParameter(format!("kernel sigma must be positive, got {sigma_k}")));
    }
    Ok((-expected_sq_l2(x, w, gram)? / (sigma_k * sigma_k)).exp())
}

/// Which expected kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Linear,
    Rbf { sigma: f64 },
}

impl KernelKind {
    pub fn eval(&self, x: &Histogram, w: &Histogram, gram: &GramModel) -> Result<f64> {
        match *self {
            KernelKind::Linear => expected_linear_kernel(x, w, gram),
            KernelKind::Rbf { sigma } => expected_rbf_kernel(x, w, gram, sigma),
        }
    }
}

/// Kernel matrix `K[i, j] = k(docs[i], docs[j])`, exactly symmetric.
pub fn kernel_matrix(docs: &[Histogram], gram: &GramModel, kind: KernelKind) -> Result<DMatrix<f64>> {
    let n = docs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kind.eval(&docs[i], &docs[j], gram)?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// `K[i, j] = k(rows[i], cols[j])`.
pub fn cross_kernel(rows: &[Histogram], cols: &[Histogram], gram: &GramModel, kind: KernelKind) -> Result<DMatrix<f64>> {
    let mut k = DMatrix::zeros(rows.len(), cols.len());
    for (i, r) in rows.iter().enumerate() {
        for (j, c) in cols.iter().enumerate() {
            k[(i, j)] = kind.eval(r, c, gram)?;
        }
    }
    Ok(k)
}

/// Pairwise expected squared distances. The diagonal holds the expected
/// distance between two independent translations of the same document,
/// which is nonzero unless `T = I`.
pub fn distance_matrix(docs: &[Histogram], gram: &GramModel) -> Result<DMatrix<f64>> {
    let n = docs.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = expected_sq_l2(&docs[i], &docs[j], gram)?;
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

/// Inverse-CDF sampler over the rows of `T` that a set of words needs.
pub struct RowSampler {
    rows: HashMap<usize, (Vec<usize>, Vec<f64>)>,
}

impl RowSampler {
    pub fn new(t: &TranslationModel, words: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut rows = HashMap::new();
        for u in words {
            if u >= t.vocab_size() {
                return Err(Error::VocabMismatch { id: u, size: t.vocab_size() });
            }
            rows.entry(u).or_insert_with(|| {
                let row = t.row(u);
                let mut acc = 0.0;
                let cdf = row.iter().map(|&(_, p)| {
                    acc += p;
                    acc
                });
                let cdf: Vec<f64> = cdf.collect();
                let total = *cdf.last().unwrap_or(&1.0);
                (row.iter().map(|e| e.0).collect(), cdf.into_iter().map(|c| c / total).collect())
            });
        }
        Ok(Self { rows })
    }

    /// Draws the translation of `u`. Panics if `u` was not registered.
    pub fn sample<R: Rng + ?Sized>(&self, u: usize, rng: &mut R) -> usize {
        let (targets, cdf) = &self.rows[&u];
        if targets.len() == 1 {
            return targets[0];
        }
        let r: f64 = rng.random();
        let i = cdf.partition_point(|&c| c <= r);
        targets[i.min(targets.len() - 1)]
    }
}

/// Translates every token independently through `T`.
pub fn sample_tokens<R: Rng + ?Sized>(tokens: &[usize], t: &TranslationModel, rng: &mut R) -> Result<Vec<usize>> {
    let sampler = RowSampler::new(t, tokens.iter().copied())?;
    Ok(tokens.iter().map(|&u| sampler.sample(u, rng)).collect())
}

/// One random translation of `doc`, reproducible from `seed` (ChaCha8).
pub fn sample_translation(doc: &Document, t: &TranslationModel, seed: u64) -> Result<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Document {
        id: doc.id.clone(),
        label: doc.label.clone(),
        tokens: sample_tokens(&doc.tokens, t, &mut rng)?,
    })
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Averages `‖γ(y) - γ(z)‖²` over `samples` independent translation pairs.
///
/// The standard error is `sd / √samples` with the unbiased sample variance
/// (zero when `samples == 1`).
pub fn mc_expected_sq_l2(
    x: &[usize],
    w: &[usize],
    t: &TranslationModel,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("at least one sample is required".into()));
    }
    if x.is_empty() || w.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let sampler = RowSampler::new(t, x.iter().chain(w).copied())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (inv_x, inv_w) = (1.0 / x.len() as f64, 1.0 / w.len() as f64);
    let mut diff = vec![0.0; t.vocab_size()];
    let mut seen = vec![false; t.vocab_size()];
    let mut touched = Vec::new();

    // Welford accumulation.
    let (mut mean, mut m2) = (0.0, 0.0);
    for s in 0..samples {
        for &u in x {
            let v = sampler.sample(u, &mut rng);
            diff[v] += inv_x;
            if !seen[v] {
                seen[v] = true;
                touched.push(v);
            }
        }
        for &u in w {
            let v = sampler.sample(u, &mut rng);
            diff[v] -= inv_w;
            if !seen[v] {
                seen[v] = true;
                touched.push(v);
            }
        }
        let mut d2 = 0.0;
        for &v in &touched {
            d2 += diff[v] * diff[v];
            diff[v] = 0.0;
            seen[v] = false;
        }
        touched.clear();
        let delta = d2 - mean;
        mean += delta / (s + 1) as f64;
        m2 += delta * (d2 - mean);
    }
    let stderr = if samples > 1 {
        (m2 / (samples - 1) as f64).sqrt() / (samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate { mean, stderr, samples })
}
