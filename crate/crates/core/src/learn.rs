//! Nearest-neighbor classification, kernel PCA and Fisher's linear discriminant.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Majority label among the `k` nearest training items.
///
/// Distance ties keep training-set order; vote ties go to the label with the
/// smallest summed distance, then to the label seen first.
pub fn knn_classify<T, L, F>(train: &[(L, T)], query: &T, k: usize, metric: F) -> Result<L>
where
    L: Clone + PartialEq,
    F: Fn(&T, &T) -> f64,
{
    let distances: Vec<f64> = train.iter().map(|(_, x)| metric(query, x)).collect();
    let labels: Vec<&L> = train.iter().map(|(l, _)| l).collect();
    knn_vote(&labels, &distances, k).cloned()
}

/// kNN vote given precomputed distances to every training item.
pub fn knn_vote<'a, L: PartialEq>(labels: &[&'a L], distances: &[f64], k: usize) -> Result<&'a L> {
    if labels.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if labels.len() != distances.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), found: distances.len() });
    }
    if k == 0 || k > labels.len() {
        return Err(Error::InvalidParameter(format!("k = {k} with {} training items", labels.len())));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    // Stable sort keeps training order among equal distances.
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));

    let mut tally: Vec<(&L, usize, f64)> = Vec::new();
    for &i in &order[..k] {
        match tally.iter_mut().find(|(l, _, _)| *l == labels[i]) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 += distances[i];
            }
            None => tally.push((labels[i], 1, distances[i])),
        }
    }
    let mut best = 0;
    for (i, t) in tally.iter().enumerate().skip(1) {
        let b = &tally[best];
        if t.1 > b.1 || (t.1 == b.1 && t.2 < b.2) {
            best = i;
        }
    }
    Ok(tally[best].0)
}

/// Eigenvalues at or below this are treated as zero.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Kernel PCA fitted on a training kernel matrix.
///
/// Eigenvectors `α_i` of the double-centered kernel are scaled so that
/// `λ_i ‖α_i‖² = 1`; the projection of a point is then `α_iᵀ k̃` and the
/// training embedding is `√λ_i v_i`.
#[derive(Debug, Clone)]
pub struct KpcaModel {
    eigenvalues: Vec<f64>,
    alphas: DMatrix<f64>,
    train_coords: DMatrix<f64>,
    row_means: DVector<f64>,
    grand_mean: f64,
    requested: usize,
}

impl KpcaModel {
    /// Number of retained components.
    pub fn dim(&self) -> usize {
        self.alphas.ncols()
    }

    /// True when fewer positive eigenvalues than requested were available.
    pub fn is_rank_deficient(&self) -> bool {
        self.dim() < self.requested
    }

    /// Every positive centered eigenvalue, nonincreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn retained_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.dim()]
    }

    /// Training embedding, one row per training point.
    pub fn train_coords(&self) -> &DMatrix<f64> {
        &self.train_coords
    }

    pub fn n_train(&self) -> usize {
        self.row_means.len()
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Same fit restricted to the leading `k` components.
    pub fn truncate(&self, k: usize) -> KpcaModel {
        let k = k.min(self.dim());
        KpcaModel {
            eigenvalues: self.eigenvalues.clone(),
            alphas: self.alphas.columns(0, k).into_owned(),
            train_coords: self.train_coords.columns(0, k).into_owned(),
            row_means: self.row_means.clone(),
            grand_mean: self.grand_mean,
            requested: k,
        }
    }

    fn center_row(&self, k_row: &[f64]) -> Result<DVector<f64>> {
        let n = self.n_train();
        if k_row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: k_row.len() });
        }
        let mean = k_row.iter().sum::<f64>() / n as f64;
        Ok(DVector::from_iterator(
            n,
            k_row.iter().zip(self.row_means.iter()).map(|(k, r)| k - r - mean + self.grand_mean),
        ))
    }
}

pub fn kpca_fit(kernel: &DMatrix<f64>, k: usize) -> Result<KpcaModel> {
    let n = kernel.nrows();
    if kernel.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: kernel.ncols() });
    }
    if n == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let scale = kernel.amax().max(1.0);
    if (kernel - kernel.transpose()).amax() > 1e-10 * scale {
        return Err(Error::InvalidParameter("kernel matrix is not symmetric".into()));
    }
    let row_means = DVector::from_iterator(n, kernel.column_iter().map(|c| c.mean()));
    let grand_mean = row_means.mean();
    let mut centered = DMatrix::from_fn(n, n, |i, j| kernel[(i, j)] - row_means[i] - row_means[j] + grand_mean);
    centered = (&centered + centered.transpose()) * 0.5;

    let eig = SymmetricEigen::try_new(centered, f64::EPSILON, 100 * n.max(10)).ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let floor = EIGEN_FLOOR.max(eig.eigenvalues.amax() * n as f64 * f64::EPSILON);
    let positive: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > floor).collect();
    let eigenvalues: Vec<f64> = positive.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = k.min(positive.len());

    let mut alphas = DMatrix::zeros(n, dim);
    let mut train_coords = DMatrix::zeros(n, dim);
    for (c, &i) in positive.iter().take(dim).enumerate() {
        let v = eig.eigenvectors.column(i);
        let s = eigenvalues[c].sqrt();
        alphas.set_column(c, &(v / s));
        train_coords.set_column(c, &(v * s));
    }
    Ok(KpcaModel { eigenvalues, alphas, train_coords, row_means, grand_mean, requested: k })
}

/// Coordinates of a new point from its kernel values against the training set.
pub fn kpca_project(model: &KpcaModel, k_row: &[f64]) -> Result<Vec<f64>> {
    let centered = model.center_row(k_row)?;
    Ok((model.alphas.transpose() * centered).iter().copied().collect())
}

/// Share of the total positive spectrum captured by the first `k` components.
pub fn variance_fraction(model: &KpcaModel, k: usize) -> f64 {
    let total: f64 = model.eigenvalues.iter().sum();
    if total <= 0.0 {
        return 1.0;
    }
    let k = k.min(model.eigenvalues.len());
    model.eigenvalues[..k].iter().sum::<f64>() / total
}

/// Squared feature-space distance between a point and its projection onto
/// the retained components (after centering).
pub fn test_residual(model: &KpcaModel, k_row: &[f64], k_self: f64) -> Result<f64> {
    let coords = kpca_project(model, k_row)?;
    let mean = k_row.iter().sum::<f64>() / k_row.len() as f64;
    let centered_self = k_self - 2.0 * mean + model.grand_mean;
    let r = centered_self - coords.iter().map(|y| y * y).sum::<f64>();
    if r < -1e-10 {
        return Err(Error::NegativeResidual(r));
    }
    Ok(r.max(0.0))
}

/// Multiclass linear discriminant with a shared (pooled) covariance.
///
/// Predicts the class whose mean is nearest in the Mahalanobis metric of the
/// ridge-regularized pooled within-class covariance; class priors are
/// treated as equal.
#[derive(Debug, Clone)]
pub struct LdaModel<L> {
    classes: Vec<L>,
    means: Vec<DVector<f64>>,
    scatter: DMatrix<f64>,
    ridge: f64,
    weights: Vec<DVector<f64>>,
    biases: Vec<f64>,
}

impl<L: Clone + Ord> LdaModel<L> {
    pub fn classes(&self) -> &[L] {
        &self.classes
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    /// Pooled within-class covariance including the ridge.
    pub fn scatter(&self) -> &DMatrix<f64> {
        &self.scatter
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Linear discriminant scores, one per class.
    pub fn scores(&self, x: &DVector<f64>) -> Vec<f64> {
        self.weights.iter().zip(&self.biases).map(|(w, b)| w.dot(x) + b).collect()
    }

    pub fn predict(&self, x: &DVector<f64>) -> Result<L> {
        if x.len() != self.scatter.nrows() {
            return Err(Error::DimensionMismatch { expected: self.scatter.nrows(), found: x.len() });
        }
        let scores = self.scores(x);
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        Ok(self.classes[best].clone())
    }
}

/// Fits the discriminant. `ridge = None` uses `1e-6 · trace(S) / dim`.
pub fn lda_fit<L: Clone + Ord>(points: &[(L, DVector<f64>)], ridge: Option<f64>) -> Result<LdaModel<L>> {
    let dim = points.first().map(|p| p.1.len()).ok_or(Error::EmptyTrainingSet)?;
    if let Some(p) = points.iter().find(|p| p.1.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: p.1.len() });
    }
    let mut classes: Vec<L> = points.iter().map(|p| p.0.clone()).collect();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::DegenerateClass("need at least two classes".into()));
    }
    let mut means = Vec::with_capacity(classes.len());
    for c in &classes {
        let members: Vec<&DVector<f64>> = points.iter().filter(|p| &p.0 == c).map(|p| &p.1).collect();
        if members.len() < 2 {
            return Err(Error::DegenerateClass("every class needs at least two points".into()));
        }
        let sum = members.iter().fold(DVector::zeros(dim), |acc, x| acc + *x);
        means.push(sum / members.len() as f64);
    }
    let mut scatter = DMatrix::zeros(dim, dim);
    for (label, x) in points {
        let c = classes.binary_search(label).expect("class present");
        let d = x - &means[c];
        scatter += &d * d.transpose();
    }
    scatter /= (points.len() - classes.len()) as f64;

    let ridge = match ridge {
        Some(r) if r >= 0.0 => r,
        Some(r) => return Err(Error::InvalidParameter(format!("negative ridge {r}"))),
        None => {
            let r = 1e-6 * scatter.trace() / dim.max(1) as f64;
            if r > 0.0 { r } else { 1e-12 }
        }
    };
    for i in 0..dim {
        scatter[(i, i)] += ridge;
    }
    let precision = scatter
        .clone()
        .cholesky()
        .ok_or_else(|| Error::DegenerateClass("within-class scatter is singular".into()))?
        .inverse();
    let weights: Vec<DVector<f64>> = means.iter().map(|m| &precision * m).collect();
    let biases = means.iter().zip(&weights).map(|(m, w)| -0.5 * m.dot(w)).collect();
    Ok(LdaModel { classes, means, scatter, ridge, weights, biases })
}

pub fn lda_predict<L: Clone + Ord>(model: &LdaModel<L>, x: &DVector<f64>) -> Result<L> {
    model.predict(x)
}
