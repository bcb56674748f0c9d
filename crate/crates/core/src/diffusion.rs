//! Word graph, normalized Laplacian, heat kernel and the translation matrix.
//!
//! Edge weights are heat-flow weights on the Fisher geometry,
//! `e(u,v) = exp(-arccos²(Σ_w √(q_u(w) q_v(w))) / σ²)`, self-loops included.
//! The graph Laplacian is `L = I - D^{-1/2} E D^{-1/2}` with `D_ii = Σ_j e_ij`
//! and the heat kernel `exp(-tL)` is evaluated through the full symmetric
//! eigendecomposition of `L`. Rows of the heat kernel are normalized to give
//! the stochastic translation matrix `T`.
//!
//! Excluded words (typically the most frequent ones) never enter the graph:
//! they translate to themselves with probability one and receive no mass.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contextual::{ContextualModel, WordRef};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::geometry::sparse_fisher_distance;

/// Round-off below zero tolerated (and clamped) in heat kernel entries.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// Default size of the frequent-word exclusion set: `min(2000, 10% of vocabulary)`.
pub fn default_exclusion_count(vocab_size: usize) -> usize {
    (vocab_size / 10).min(2000)
}

/// The `n` words with the highest document frequency.
pub fn exclusion_set(vocab: &Vocabulary, n: usize) -> BTreeSet<usize> {
    vocab.most_frequent(n).into_iter().collect()
}

/// Ascending ids of `0..vocab_size` not in `excluded`.
pub fn included_ids(vocab_size: usize, excluded: &BTreeSet<usize>) -> Vec<usize> {
    (0..vocab_size).filter(|id| !excluded.contains(id)).collect()
}

/// Median Fisher distance over (at most) `max_pairs` random word pairs.
///
/// All pairs are used when there are no more than `max_pairs` of them.
/// Falls back to 1 when the sample is empty or degenerate.
pub fn default_sigma(model: &ContextualModel, included: &[usize], max_pairs: usize, seed: u64) -> f64 {
    let k = included.len();
    let total_pairs = k.saturating_mul(k.saturating_sub(1)) / 2;
    let mut dists = Vec::new();
    if total_pairs <= max_pairs {
        for i in 0..k {
            for j in (i + 1)..k {
                dists.push(pair_distance(model, included[i], included[j]));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while dists.len() < max_pairs {
            let i = rng.random_range(0..k);
            let j = rng.random_range(0..k);
            if i != j {
                dists.push(pair_distance(model, included[i], included[j]));
            }
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 1 { dists[mid] } else { 0.5 * (dists[mid - 1] + dists[mid]) };
    if median > 0.0 && median.is_finite() {
        median
    } else {
        1.0
    }
}

fn pair_distance(model: &ContextualModel, u: usize, v: usize) -> f64 {
    sparse_fisher_distance(model.sparse_row(u), model.sparse_row(v))
}

fn heat_weight(distance: f64, sigma: f64) -> f64 {
    (-(distance * distance) / (sigma * sigma)).exp()
}

#[derive(Debug, Clone)]
pub struct WordGraph {
    weights: DMatrix<f64>,
    sigma: f64,
    word_ids: Vec<usize>,
}

impl WordGraph {
    /// Builds a graph directly from a symmetric weight matrix.
    pub fn from_weights(weights: DMatrix<f64>, sigma: f64, word_ids: Vec<usize>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n || word_ids.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: weights.ncols() });
        }
        for i in 0..n {
            for j in 0..i {
                if weights[(i, j)] != weights[(j, i)] {
                    return Err(Error::InvalidParameter(format!("weights not symmetric at ({i}, {j})")));
                }
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidParameter("negative edge weight".into()));
        }
        Ok(Self { weights, sigma, word_ids })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn word_ids(&self) -> &[usize] {
        &self.word_ids
    }

    pub fn len(&self) -> usize {
        self.word_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_ids.is_empty()
    }

    /// Keeps the `k` strongest off-diagonal edges of each node, then
    /// re-symmetrizes by taking the max of the two directions.
    pub fn sparsify(&self, k: usize) -> WordGraph {
        let n = self.len();
        let mut keep = DMatrix::zeros(n, n);
        for i in 0..n {
            keep[(i, i)] = self.weights[(i, i)];
            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| self.weights[(i, b)].total_cmp(&self.weights[(i, a)]).then(a.cmp(&b)));
            for &j in order.iter().take(k) {
                keep[(i, j)] = self.weights[(i, j)];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let w = keep[(i, j)].max(keep[(j, i)]);
                keep[(i, j)] = w;
                keep[(j, i)] = w;
            }
        }
        WordGraph { weights: keep, sigma: self.sigma, word_ids: self.word_ids.clone() }
    }
}

/// Complete word graph over `included` with heat-flow edge weights.
pub fn edge_weights(model: &ContextualModel, sigma: f64, included: &[usize]) -> Result<WordGraph> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if included.is_empty() {
        return Err(Error::InvalidParameter("no words to build a graph over".into()));
    }
    if let Some(&bad) = included.iter().find(|&&id| id >= model.len()) {
        return Err(Error::VocabMismatch { id: bad, size: model.len() });
    }
    let n = included.len();
    let mut weights = DMatrix::zeros(n, n);
    for i in 0..n {
        weights[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let w = heat_weight(pair_distance(model, included[i], included[j]), sigma);
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    Ok(WordGraph { weights, sigma, word_ids: included.to_vec() })
}

/// Eigendecomposition of the normalized Laplacian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    degree: DVector<f64>,
}

impl LaplacianSpectrum {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn degree(&self) -> &DVector<f64> {
        &self.degree
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.max()
    }

    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.apply_spectral(|l| l)
    }

    fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[j]);
        }
        &scaled * q.transpose()
    }
}

/// `L = I - D^{-1/2} E D^{-1/2}`, exactly symmetric.
pub fn laplacian_matrix(graph: &WordGraph) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let e = graph.weights();
    let n = e.nrows();
    let degree = DVector::from_iterator(n, e.row_iter().map(|r| r.sum()));
    if let Some(i) = degree.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::ZeroRow(graph.word_ids()[i]));
    }
    let inv_sqrt = degree.map(|d| 1.0 / d.sqrt());
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let off = e[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
            let v = if i == j { 1.0 - off } else { -off };
            l[(i, j)] = v;
            l[(j, i)] = v;
        }
    }
    Ok((l, degree))
}

pub fn normalized_laplacian(graph: &WordGraph) -> Result<LaplacianSpectrum> {
    let (l, degree) = laplacian_matrix(graph)?;
    let n = l.nrows();
    let eig = SymmetricEigen::try_new(l, f64::EPSILON, 100 * n.max(10)).ok_or(Error::EigenFailure)?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = DMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>(),
    );
    Ok(LaplacianSpectrum { eigenvalues, eigenvectors, degree })
}

/// `exp(-tL)` from a precomputed spectrum. `t = 0` yields the exact identity.
pub fn heat_kernel(spectrum: &LaplacianSpectrum, t: f64) -> Result<DMatrix<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("diffusion time must be >= 0, got {t}")));
    }
    let n = spectrum.eigenvalues.len();
    if t == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let mut h = spectrum.apply_spectral(|l| (-t * l).exp());
    for i in 0..n {
        for j in i..n {
            // Mirror so the result is exactly symmetric.
            let v = 0.5 * (h[(i, j)] + h[(j, i)]);
            if v < -NEGATIVE_TOL || !v.is_finite() {
                return Err(Error::NegativeEntry { row: i, col: j, value: v });
            }
            let v = v.max(0.0);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Row-stochastic word-to-word translation probabilities.
///
/// Stored as a dense block over the included words; excluded words have
/// identity rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationModel {
    block: DMatrix<f64>,
    included: Vec<usize>,
    slot: Vec<Option<usize>>,
    excluded: BTreeSet<usize>,
    t: f64,
    sigma: f64,
}

impl TranslationModel {
    /// Validates and assembles a model from its stored parts.
    pub fn from_parts(
        vocab_size: usize,
        excluded: BTreeSet<usize>,
        block: DMatrix<f64>,
        t: f64,
        sigma: f64,
    ) -> Result<Self> {
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
        Ok(Self { block, included, slot, excluded, t, sigma })
    }

    /// No translation at all: `T = I`.
    pub fn identity(vocab_size: usize) -> Self {
        Self::from_parts(vocab_size, BTreeSet::new(), DMatrix::identity(vocab_size, vocab_size), 0.0, 1.0)
            .expect("identity model is well formed")
    }

    pub fn vocab_size(&self) -> usize {
        self.slot.len()
    }

    pub fn block(&self) -> &DMatrix<f64> {
        &self.block
    }

    pub fn included(&self) -> &[usize] {
        &self.included
    }

    pub fn excluded(&self) -> &BTreeSet<usize> {
        &self.excluded
    }

    pub fn is_excluded(&self, id: usize) -> bool {
        self.excluded.contains(&id)
    }

    /// Position of a word inside the dense block, `None` for excluded words.
    pub fn slot(&self, id: usize) -> Option<usize> {
        self.slot.get(id).copied().flatten()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `T[u, w] = p(u → w)`.
    pub fn entry(&self, u: usize, w: usize) -> f64 {
        match (self.slot(u), self.slot(w)) {
            (Some(i), Some(j)) => self.block[(i, j)],
            _ if u == w => 1.0,
            _ => 0.0,
        }
    }

    /// Sparse nonzero entries of row `u` as `(word id, probability)`.
    pub fn row(&self, u: usize) -> Vec<(usize, f64)> {
        match self.slot(u) {
            None => vec![(u, 1.0)],
            Some(i) => self
                .included
                .iter()
                .enumerate()
                .filter_map(|(j, &w)| {
                    let p = self.block[(i, j)];
                    (p > 0.0).then_some((w, p))
                })
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.vocab_size();
        DMatrix::from_fn(m, m, |u, w| self.entry(u, w))
    }
}

/// Row-normalizes a heat kernel over the non-excluded words into `T`.
pub fn make_translation(
    h: &DMatrix<f64>,
    excluded: &BTreeSet<usize>,
    vocab_size: usize,
    t: f64,
    sigma: f64,
) -> Result<TranslationModel> {
    let included = included_ids(vocab_size, excluded);
    if h.nrows() != included.len() || h.ncols() != included.len() {
        return Err(Error::DimensionMismatch { expected: included.len(), found: h.nrows() });
    }
    let mut block = h.clone();
    for (i, mut row) in block.row_iter_mut().enumerate() {
        if let Some(j) = row.iter().position(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::NegativeEntry { row: i, col: j, value: row[j] });
        }
        let sum = row.sum();
        if !(sum > 0.0) {
            return Err(Error::ZeroRow(included[i]));
        }
        row /= sum;
    }
    TranslationModel::from_parts(vocab_size, excluded.clone(), block, t, sigma)
}

/// Graph construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    /// Edge-weight scale; `None` picks the median pairwise Fisher distance.
    pub sigma: Option<f64>,
    /// Diffusion time.
    pub t: f64,
    /// Number of most frequent words to exclude; `None` uses the default.
    pub exclude: Option<usize>,
    /// Keep only this many strongest edges per word (0 keeps the complete graph).
    pub sparsify_k: usize,
    /// Pairs sampled for the default sigma.
    pub sigma_pairs: usize,
    pub seed: u64,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self { sigma: None, t: 1.0, exclude: None, sparsify_k: 0, sigma_pairs: 1000, seed: 0 }
    }
}

/// Everything produced by [`fit_translation`].
#[derive(Debug, Clone)]
pub struct Diffusion {
    pub graph: WordGraph,
    pub spectrum: LaplacianSpectrum,
    pub translation: TranslationModel,
}

impl Diffusion {
    /// Re-evaluates the translation model at another diffusion time.
    pub fn at_time(&self, t: f64) -> Result<TranslationModel> {
        let h = heat_kernel(&self.spectrum, t)?;
        make_translation(
            &h,
            self.translation.excluded(),
            self.translation.vocab_size(),
            t,
            self.graph.sigma(),
        )
    }
}

/// Contextual model → word graph → spectrum → translation matrix.
pub fn fit_translation(model: &ContextualModel, params: &DiffusionParams) -> Result<Diffusion> {
    let m = model.len();
    let n_excl = params.exclude.unwrap_or_else(|| default_exclusion_count(m));
    if n_excl >= m {
        return Err(Error::InvalidParameter(format!(
            "excluding {n_excl} of {m} words leaves nothing to translate"
        )));
    }
    let excluded = exclusion_set(model.vocabulary(), n_excl);
    let included = included_ids(m, &excluded);
    let sigma = match params.sigma {
        Some(s) => s,
        None => default_sigma(model, &included, params.sigma_pairs, params.seed),
    };
    let mut graph = edge_weights(model, sigma, &included)?;
    if params.sparsify_k > 0 && params.sparsify_k + 1 < graph.len() {
        graph = graph.sparsify(params.sparsify_k);
    }
    let spectrum = normalized_laplacian(&graph)?;
    let h = heat_kernel(&spectrum, params.t)?;
    let translation = make_translation(&h, &excluded, m, params.t, sigma)?;
    Ok(Diffusion { graph, spectrum, translation })
}

/// The `n` words with the largest edge weight to `word`, excluding itself.
///
/// Candidates are the words in `included`; ties go to the smaller id.
pub fn nearest_words<'a>(
    model: &ContextualModel,
    included: &[usize],
    word: impl Into<WordRef<'a>>,
    n: usize,
    sigma: f64,
) -> Result<Vec<(String, f64)>> {
    let w = model.resolve(word)?;
    if !included.contains(&w) {
        let term = model.vocabulary().term(w).unwrap_or("?");
        return Err(Error::ExcludedWord(term.to_owned()));
    }
    let row = model.sparse_row(w);
    let mut scored: Vec<(usize, f64)> = included
        .iter()
        .filter(|&&v| v != w)
        .map(|&v| (v, heat_weight(sparse_fisher_distance(row, model.sparse_row(v)), sigma)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(scored
        .into_iter()
        .map(|(v, e)| (model.vocabulary().term(v).unwrap_or("?").to_owned(), e))
        .collect())
}
