//! Evaluation harnesses: balanced 1-vs-all nearest-neighbor tasks comparing
//! plain and expected squared L2, and kernel PCA with plain and expected
//! kernels scored by discriminant error, captured variance and test residual.
//!
//! All randomness derives from one root seed; realization `r` of a task uses
//! the same split for every metric or kernel so results are paired.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Histogram, RawDocument, Tokenizer, Vocabulary};
use crate::error::{Error, Result};
use crate::expected::{distance_matrix, kernel_matrix, GramModel, KernelKind};
use crate::geometry::sparse_euclidean_sq;
use crate::learn::{kpca_fit, kpca_project, knn_vote, lda_fit, test_residual, variance_fraction};

/// A labeled document encoded against a model vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDoc {
    pub id: String,
    pub label: String,
    pub hist: Histogram,
}

#[derive(Debug, Clone, Default)]
pub struct EncodedSet {
    pub docs: Vec<LabeledDoc>,
    /// Tokens that were not in the vocabulary.
    pub skipped_tokens: usize,
    /// Unlabeled documents or documents with no known token.
    pub dropped: Vec<String>,
}

pub fn encode_labeled(raw: &[RawDocument], vocab: &Vocabulary, tokenizer: &Tokenizer) -> EncodedSet {
    let mut set = EncodedSet::default();
    for d in raw {
        let enc = vocab.encode(&tokenizer.tokenize(&d.text));
        set.skipped_tokens += enc.skipped;
        match (&d.label, Histogram::from_tokens(&enc.ids)) {
            (Some(label), Ok(hist)) => set.docs.push(LabeledDoc { id: d.id.clone(), label: label.clone(), hist }),
            _ => set.dropped.push(d.id.clone()),
        }
    }
    set
}

/// SplitMix64 over the root seed and a path of indices.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(root), |acc, &p| mix(acc ^ mix(p)))
}

fn labels_of(docs: &[LabeledDoc]) -> Vec<String> {
    docs.iter().map(|d| d.label.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Plain squared L2 between normalized histograms, for every pair.
pub fn l2_distance_matrix(docs: &[Histogram]) -> DMatrix<f64> {
    let rows: Vec<Vec<(usize, f64)>> = docs.iter().map(Histogram::normalized).collect();
    let n = rows.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sparse_euclidean_sq(&rows[i], &rows[j]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnEvalConfig {
    /// Total training sizes, split evenly between the two sides.
    pub train_sizes: Vec<usize>,
    pub test_per_class: usize,
    pub realizations: usize,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnRow {
    pub task: String,
    pub train_size: usize,
    pub metric: &'static str,
    pub mean_error: f64,
    pub sd: f64,
    /// Error of every realization, in realization order.
    pub errors: Vec<f64>,
}

pub const KNN_METRICS: [&str; 2] = ["l2", "expected-l2"];

/// Balanced 1-vs-all nearest-neighbor error rates for plain and expected L2.
///
/// Rows come out ordered by task (label order), then train size, then metric.
pub fn knn_eval(docs: &[LabeledDoc], gram: &GramModel, cfg: &KnnEvalConfig) -> Result<Vec<KnnRow>> {
    let labels = labels_of(docs);
    if labels.len() < 2 {
        return Err(Error::InsufficientClassData(format!("{} label(s); need at least 2", labels.len())));
    }
    let hists: Vec<Histogram> = docs.iter().map(|d| d.hist.clone()).collect();
    let dist = [l2_distance_matrix(&hists), distance_matrix(&hists, gram)?];

    let mut rows = Vec::new();
    for (ti, task) in labels.iter().enumerate() {
        let pos: Vec<usize> = (0..docs.len()).filter(|&i| &docs[i].label == task).collect();
        let neg: Vec<usize> = (0..docs.len()).filter(|&i| &docs[i].label != task).collect();
        for (si, &size) in cfg.train_sizes.iter().enumerate() {
            let half = size / 2;
            let need = half + cfg.test_per_class;
            if pos.len() < need || neg.len() < need {
                return Err(Error::InsufficientClassData(format!(
                    "task {task}: need {need} documents per side, have {} / {}",
                    pos.len(),
                    neg.len()
                )));
            }
            let mut errors = [Vec::new(), Vec::new()];
            for r in 0..cfg.realizations {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[ti as u64, si as u64, r as u64]));
                let (mut p, mut n) = (pos.clone(), neg.clone());
                p.shuffle(&mut rng);
                n.shuffle(&mut rng);
                let train: Vec<usize> = p[..half].iter().chain(&n[..half]).copied().collect();
                let test: Vec<usize> = p[half..need].iter().chain(&n[half..need]).copied().collect();
                let train_pos: Vec<bool> = train.iter().map(|&i| &docs[i].label == task).collect();
                let train_labels: Vec<&bool> = train_pos.iter().collect();
                for (m, d) in dist.iter().enumerate() {
                    let mut wrong = 0;
                    for &q in &test {
                        let dists: Vec<f64> = train.iter().map(|&i| d[(q, i)]).collect();
                        let predicted = *knn_vote(&train_labels, &dists, cfg.k)?;
                        if predicted != (&docs[q].label == task) {
                            wrong += 1;
                        }
                    }
                    errors[m].push(wrong as f64 / test.len() as f64);
                }
            }
            for (m, errs) in errors.into_iter().enumerate() {
                let (mean_error, sd) = mean_sd(&errs);
                rows.push(KnnRow {
                    task: task.clone(),
                    train_size: size,
                    metric: KNN_METRICS[m],
                    mean_error,
                    sd,
                    errors: errs,
                });
            }
        }
    }
    Ok(rows)
}

pub fn knn_csv(rows: &[KnnRow], seed: u64) -> String {
    let mut out = String::from("task,train_size,metric,mean_error,sd,realizations,seed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{},{}",
            r.task,
            r.train_size,
            r.metric,
            r.mean_error,
            r.sd,
            r.errors.len(),
            seed
        );
    }
    out
}

/// Per-realization errors averaged over every task, for one train size.
pub fn realization_means(rows: &[KnnRow], train_size: usize, metric: &str) -> Vec<f64> {
    let sel: Vec<&KnnRow> = rows.iter().filter(|r| r.train_size == train_size && r.metric == metric).collect();
    let n = sel.first().map_or(0, |r| r.errors.len());
    (0..n).map(|i| sel.iter().map(|r| r.errors[i]).sum::<f64>() / sel.len() as f64).collect()
}

/// One-sided paired sign test of "`a` tends to be smaller than `b`".
///
/// Ties are dropped; returns `(wins, losses, p)` with
/// `p = P(Binomial(wins + losses, ½) ≥ wins)`.
pub fn sign_test(a: &[f64], b: &[f64]) -> (usize, usize, f64) {
    let wins = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let n = wins + losses;
    let mut p = 0.0;
    let mut coef = 1.0f64; // C(n, 0)
    for k in 0..=n {
        if k >= wins {
            p += coef;
        }
        coef = coef * (n - k) as f64 / (k + 1) as f64;
    }
    (wins, losses, p / 2f64.powi(n as i32))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpcaEvalConfig {
    /// Label groups; empty means one task with every label.
    pub tasks: Vec<Vec<String>>,
    pub dims: Vec<usize>,
    pub splits: usize,
    pub train_fraction: f64,
    pub kernel_sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpcaRow {
    pub task: String,
    pub kernel: &'static str,
    pub k: usize,
    pub error_rate: f64,
    pub variance_fraction: f64,
    pub test_residual: f64,
    pub splits: usize,
}

pub const KPCA_KERNELS: [&str; 4] = ["expected-linear", "linear", "expected-rbf", "rbf"];

fn kernels(gram: &GramModel, sigma: f64) -> [(&'static str, GramModel, KernelKind); 4] {
    let plain = GramModel::identity(gram.vocab_size());
    [
        (KPCA_KERNELS[0], gram.clone(), KernelKind::Linear),
        (KPCA_KERNELS[1], plain.clone(), KernelKind::Linear),
        (KPCA_KERNELS[2], gram.clone(), KernelKind::Rbf { sigma }),
        (KPCA_KERNELS[3], plain, KernelKind::Rbf { sigma }),
    ]
}

/// Stratified split: about `fraction` of every class goes to training.
pub fn stratified_split(labels: &[&str], fraction: f64, rng: &mut ChaCha8Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    let classes: BTreeSet<&str> = labels.iter().copied().collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(rng);
        let n_train = ((idx.len() as f64) * fraction).round() as usize;
        if n_train < 2 || n_train >= idx.len() {
            return Err(Error::InsufficientClassData(format!(
                "class {c} has {} documents; cannot split {fraction}",
                idx.len()
            )));
        }
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Scores of one kernel PCA fit on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct KpcaScores {
    pub k: usize,
    pub error_rate: f64,
    pub variance_fraction: f64,
    pub test_residual: f64,
}

/// Fits kernel PCA on `train` rows/cols of `kernel` and scores every `k`.
pub fn kpca_scores(
    kernel: &DMatrix<f64>,
    labels: &[&str],
    train: &[usize],
    test: &[usize],
    dims: &[usize],
) -> Result<Vec<KpcaScores>> {
    let k_train = kernel.select_rows(train).select_columns(train);
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    let model = kpca_fit(&k_train, max_dim)?;
    let test_rows: Vec<Vec<f64>> = test.iter().map(|&q| train.iter().map(|&i| kernel[(q, i)]).collect()).collect();

    let mut out = Vec::with_capacity(dims.len());
    for &k in dims {
        let m = model.truncate(k);
        let coords = m.train_coords();
        let points: Vec<(&str, DVector<f64>)> =
            train.iter().enumerate().map(|(r, &i)| (labels[i], coords.row(r).transpose())).collect();
        let lda = lda_fit(&points, None)?;
        let mut wrong = 0;
        let mut residual = 0.0;
        for (row, &q) in test_rows.iter().zip(test) {
            let y = DVector::from_vec(kpca_project(&m, row)?);
            if lda.predict(&y)? != labels[q] {
                wrong += 1;
            }
            residual += test_residual(&m, row, kernel[(q, q)])?;
        }
        out.push(KpcaScores {
            k,
            error_rate: wrong as f64 / test.len() as f64,
            variance_fraction: variance_fraction(&model, k),
            test_residual: residual / test.len() as f64,
        });
    }
    Ok(out)
}

/// Kernel PCA evaluation averaged over stratified random splits.
///
/// Rows come out ordered by task, kernel, then dimension.
pub fn kpca_eval(docs: &[LabeledDoc], gram: &GramModel, cfg: &KpcaEvalConfig) -> Result<Vec<KpcaRow>> {
    let tasks = if cfg.tasks.is_empty() { vec![labels_of(docs)] } else { cfg.tasks.clone() };
    let kernels = kernels(gram, cfg.kernel_sigma);
    let mut rows = Vec::new();
    for (ti, task) in tasks.iter().enumerate() {
        let members: Vec<&LabeledDoc> = docs.iter().filter(|d| task.contains(&d.label)).collect();
        let present: BTreeSet<&str> = members.iter().map(|d| d.label.as_str()).collect();
        if present.len() < 2 {
            return Err(Error::InsufficientClassData(format!("task {} has fewer than 2 labels", task.join("+"))));
        }
        let hists: Vec<Histogram> = members.iter().map(|d| d.hist.clone()).collect();
        let labels: Vec<&str> = members.iter().map(|d| d.label.as_str()).collect();
        let full: Vec<DMatrix<f64>> =
            kernels.iter().map(|(_, g, kind)| kernel_matrix(&hists, g, *kind)).collect::<Result<_>>()?;

        let mut sums = vec![vec![(0.0, 0.0, 0.0); cfg.dims.len()]; kernels.len()];
        for s in 0..cfg.splits {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[ti as u64, s as u64]));
            let (train, test) = stratified_split(&labels, cfg.train_fraction, &mut rng)?;
            for (ki, kernel) in full.iter().enumerate() {
                for (di, sc) in kpca_scores(kernel, &labels, &train, &test, &cfg.dims)?.into_iter().enumerate() {
                    let acc = &mut sums[ki][di];
                    acc.0 += sc.error_rate;
                    acc.1 += sc.variance_fraction;
                    acc.2 += sc.test_residual;
                }
            }
        }
        let n = cfg.splits as f64;
        for (ki, (name, _, _)) in kernels.iter().enumerate() {
            for (di, &k) in cfg.dims.iter().enumerate() {
                let (e, v, r) = sums[ki][di];
                rows.push(KpcaRow {
                    task: task.join("+"),
                    kernel: name,
                    k,
                    error_rate: e / n,
                    variance_fraction: v / n,
                    test_residual: r / n,
                    splits: cfg.splits,
                });
            }
        }
    }
    Ok(rows)
}

pub fn kpca_csv(rows: &[KpcaRow], seed: u64) -> String {
    let mut out = String::from("task,kernel,k,error_rate,variance_fraction,test_residual,splits,seed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{},{}",
            r.task, r.kernel, r.k, r.error_rate, r.variance_fraction, r.test_residual, r.splits, seed
        );
    }
    out
}
