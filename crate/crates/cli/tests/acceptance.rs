//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Oracles here are computed independently of the library code paths they
//! check (Monte-Carlo sampling, exhaustive enumeration, dense algebra, SVD).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semdist::config::RunConfig;
use semdist::corpus::{read_tsv, RawDocument, Tokenizer};
use semdist::diffusion::{heat_kernel, normalized_laplacian, WordGraph};
use semdist::eval::{
    derive_seed, encode_labeled, knn_eval, kpca_csv, kpca_eval, realization_means, sign_test, stratified_split,
    KnnEvalConfig, KpcaEvalConfig, LabeledDoc,
};
use semdist::expected::{kernel_matrix, KernelKind};
use semdist::geometry::{fisher_distance, kl_divergence};
use semdist::learn::{kpca_fit, lda_fit};
use semdist::{
    build_corpus, estimate_contextual, expected_linear_kernel, expected_sq_l2, fit_translation, precompute_gram,
    GramModel, Histogram, ModelFile, TranslationModel,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn bundled(name: &str) -> (RunConfig, Vec<RawDocument>) {
    let root = workspace();
    let mut cfg = RunConfig::load(root.join(format!("data/{name}.conf"))).unwrap();
    cfg.corpus = Some(root.join(cfg.corpus.unwrap()));
    let file = std::fs::File::open(cfg.corpus.as_ref().unwrap()).unwrap();
    let raw = read_tsv(std::io::BufReader::new(file)).unwrap();
    (cfg, raw)
}

struct Fitted {
    cfg: RunConfig,
    raw: Vec<RawDocument>,
    docs: Vec<LabeledDoc>,
    diffusion: semdist::diffusion::Diffusion,
    gram: GramModel,
}

fn fit_bundled(name: &str) -> Fitted {
    let (cfg, raw) = bundled(name);
    let corpus = build_corpus(raw.clone(), cfg.tokenize_options()).unwrap();
    let ctx = estimate_contextual(&corpus).unwrap();
    let diffusion = fit_translation(&ctx, &cfg.diffusion_params()).unwrap();
    let gram = precompute_gram(&diffusion.translation);
    let docs = encode_labeled(&raw, corpus.vocabulary(), &Tokenizer::new(cfg.tokenize_options())).docs;
    Fitted { cfg, raw, docs, diffusion, gram }
}

/// Random row-stochastic translation model; a few words may be excluded.
/// Returns the model and its dense matrix built independently.
fn random_translation(rng: &mut ChaCha8Rng, m: usize) -> (TranslationModel, DMatrix<f64>) {
    let n_excl = rng.random_range(0..=m.saturating_sub(1).min(3));
    let mut excluded = BTreeSet::new();
    while excluded.len() < n_excl {
        excluded.insert(rng.random_range(0..m));
    }
    let included: Vec<usize> = (0..m).filter(|u| !excluded.contains(u)).collect();
    let k = included.len();
    let mut block = DMatrix::from_fn(k, k, |_, _| rng.random::<f64>().powi(3) + 1e-3);
    for mut row in block.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    let mut dense = DMatrix::identity(m, m);
    for (a, &u) in included.iter().enumerate() {
        for (b, &v) in included.iter().enumerate() {
            dense[(u, v)] = block[(a, b)];
        }
    }
    (TranslationModel::from_parts(m, excluded, block, 1.0, 1.0).unwrap(), dense)
}

fn random_tokens(rng: &mut ChaCha8Rng, m: usize, max_len: usize) -> Vec<usize> {
    let len = rng.random_range(1..=max_len);
    (0..len).map(|_| rng.random_range(0..m)).collect()
}

fn dense_gamma(tokens: &[usize], m: usize) -> DVector<f64> {
    let mut g = DVector::zeros(m);
    for &u in tokens {
        g[u] += 1.0 / tokens.len() as f64;
    }
    g
}

/// Plain Monte-Carlo estimate of E‖γ(y) − γ(z)‖² with its standard error.
fn monte_carlo(x: &[usize], w: &[usize], dense: &DMatrix<f64>, samples: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let m = dense.nrows();
    let cdf: Vec<Vec<f64>> = (0..m)
        .map(|u| {
            let mut acc = 0.0;
            (0..m)
                .map(|v| {
                    acc += dense[(u, v)];
                    acc
                })
                .collect()
        })
        .collect();
    let draw = |u: usize, rng: &mut ChaCha8Rng| {
        let r = rng.random::<f64>() * cdf[u][m - 1];
        cdf[u].partition_point(|&c| c <= r).min(m - 1)
    };
    let mut diff = vec![0.0; m];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        diff.iter_mut().for_each(|d| *d = 0.0);
        for &u in x {
            diff[draw(u, rng)] += 1.0 / x.len() as f64;
        }
        for &u in w {
            diff[draw(u, rng)] -= 1.0 / w.len() as f64;
        }
        let v: f64 = diff.iter().map(|d| d * d).sum();
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    (mean, (var.max(0.0) / n).sqrt())
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut agree = 0;
    let mut deterministic = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = rng.random_range(2..=20);
        let (t, dense) = random_translation(&mut rng, m);
        let x = random_tokens(&mut rng, m, 30);
        let w = random_tokens(&mut rng, m, 30);
        let gram = precompute_gram(&t);
        let closed = expected_sq_l2(
            &Histogram::from_tokens(&x).unwrap(),
            &Histogram::from_tokens(&w).unwrap(),
            &gram,
        )
        .unwrap();
        let (mean, se) = monte_carlo(&x, &w, &dense, 100_000, &mut rng);
        if se == 0.0 {
            // Every token translates deterministically: the estimate is exact
            // up to summation round-off.
            deterministic += 1;
            if (closed - mean).abs() <= 1e-10 * closed.abs().max(1.0) {
                agree += 1;
            }
            continue;
        }
        let z = (closed - mean).abs() / se;
        worst = worst.max(z);
        if z <= 3.0 {
            agree += 1;
        }
    }
    outcome(
        agree >= 95,
        format!(
            "{agree}/100 instances agree ({deterministic} deterministic, exact to round-off); \
             worst |z| among random ones {worst:.2}"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.random_range(1..=40);
        let gram = GramModel::identity(m);
        let x = random_tokens(&mut rng, m, 50);
        let w = random_tokens(&mut rng, m, 50);
        let e = expected_sq_l2(&Histogram::from_tokens(&x).unwrap(), &Histogram::from_tokens(&w).unwrap(), &gram)
            .unwrap();
        let plain = (dense_gamma(&x, m) - dense_gamma(&w, m)).norm_squared();
        worst = worst.max((e - plain).abs());
    }
    outcome(worst <= 1e-12, format!("max |expected - plain| = {worst:e} over 1000 pairs"))
}

fn criterion_3() -> Outcome {
    let rows = [[0.9, 0.1], [0.2, 0.8]];
    // Enumerate the four (y, z) outcomes for x = word 0, w = word 1.
    let (mut sq, mut lin) = (0.0, 0.0);
    for y in 0..2 {
        for z in 0..2 {
            let p = rows[0][y] * rows[1][z];
            sq += p * if y == z { 0.0 } else { 2.0 };
            lin += p * if y == z { 1.0 } else { 0.0 };
        }
    }
    let t = TranslationModel::from_parts(2, BTreeSet::new(), DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.2, 0.8]), 1.0, 1.0)
        .unwrap();
    let gram = precompute_gram(&t);
    let (x, w) = (Histogram::from_tokens(&[0]).unwrap(), Histogram::from_tokens(&[1]).unwrap());
    let e_sq = expected_sq_l2(&x, &w, &gram).unwrap();
    let e_lin = expected_linear_kernel(&x, &w, &gram).unwrap();
    let pass = (sq - 1.48f64).abs() < 1e-12
        && (lin - 0.26f64).abs() < 1e-12
        && (e_sq - sq).abs() < 1e-12
        && (e_lin - lin).abs() < 1e-12;
    outcome(pass, format!("expected_sq_l2 = {e_sq} (enumerated {sq}), expected_linear = {e_lin} (enumerated {lin})"))
}

/// exp(−t L) by scaling and squaring of a Taylor series.
fn expm_neg(l: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = l.nrows();
    let squarings = 6;
    let a = l * (-t / f64::powi(2.0, squarings));
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut graphs = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [2, 5, 30, 60] {
        let mut w = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
        w = (&w + w.transpose()) * 0.5;
        w.fill_diagonal(1.0);
        graphs.push(WordGraph::from_weights(w, 1.0, (0..n).collect()).unwrap());
    }
    let fitted = fit_bundled("synonym");
    graphs.push(fitted.diffusion.graph.clone());

    let (mut lo, mut hi, mut semi, mut expm_err) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for g in &graphs {
        let s = normalized_laplacian(g).unwrap();
        lo = lo.min(s.min_eigenvalue());
        hi = hi.max(s.max_eigenvalue());
        for (t1, t2) in [(0.3, 0.7), (1.0, 2.0), (0.05, 4.0)] {
            let lhs = heat_kernel(&s, t1).unwrap() * heat_kernel(&s, t2).unwrap();
            semi = semi.max((lhs - heat_kernel(&s, t1 + t2).unwrap()).amax());
        }
        // Independent normalized Laplacian and matrix exponential.
        let w = g.weights();
        let d: Vec<f64> = w.row_iter().map(|r| r.sum()).collect();
        let n = w.nrows();
        let l = DMatrix::from_fn(n, n, |i, j| {
            let off = w[(i, j)] / (d[i] * d[j]).sqrt();
            if i == j { 1.0 - off } else { -off }
        });
        expm_err = expm_err.max((expm_neg(&l, 1.0) - heat_kernel(&s, 1.0).unwrap()).amax());
    }
    pass &= lo >= -1e-8 && hi <= 2.0 + 1e-8 && semi <= 1e-8 && expm_err <= 1e-8;
    notes.push(format!("eigenvalues in [{lo:.3e}, {hi:.6}], semigroup err {semi:.1e}, expm err {expm_err:.1e}"));

    let t = fitted.diffusion.translation.to_dense();
    let row_err = t.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let min_entry = t.min();
    pass &= row_err <= 1e-10 && min_entry >= 0.0;
    notes.push(format!("T rows sum to 1 within {row_err:.1e}, min entry {min_entry:.2e}"));

    let two = WordGraph::from_weights(DMatrix::from_element(2, 2, 1.0), 1.0, vec![0, 1]).unwrap();
    let h = heat_kernel(&normalized_laplacian(&two).unwrap(), 1.0).unwrap();
    let e = (-1.0f64).exp();
    let want = DMatrix::from_row_slice(2, 2, &[1.0 + e, 1.0 - e, 1.0 - e, 1.0 + e]) * 0.5;
    let closed = (h - want).amax();
    pass &= closed <= 1e-10;
    notes.push(format!("two-node closed form err {closed:.1e}"));
    outcome(pass, notes.join("; "))
}

fn min_max_eig(k: &DMatrix<f64>) -> (f64, f64) {
    let e = SymmetricEigen::new(k.clone()).eigenvalues;
    (e.min(), e.max())
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lin_ok = true;
    let mut rbf_ok = true;
    let mut worst = (0.0f64, 0.0f64);
    let mut check = |docs: &[Histogram], gram: &GramModel| {
        let (lo, hi) = min_max_eig(&kernel_matrix(docs, gram, KernelKind::Linear).unwrap());
        lin_ok &= lo >= -1e-8 * hi;
        worst.0 = worst.0.min(lo / hi);
        for sigma in [0.1, 0.5, 1.0, 3.0] {
            let (lo, hi) = min_max_eig(&kernel_matrix(docs, gram, KernelKind::Rbf { sigma }).unwrap());
            rbf_ok &= lo >= -1e-8 * hi;
            worst.1 = worst.1.min(lo / hi);
        }
    };
    for _ in 0..20 {
        let m = rng.random_range(2..=40);
        let (t, _) = random_translation(&mut rng, m);
        let docs: Vec<Histogram> =
            (0..50).map(|_| Histogram::from_tokens(&random_tokens(&mut rng, m, 30)).unwrap()).collect();
        check(&docs, &precompute_gram(&t));
    }
    let fitted = fit_bundled("synonym");
    let docs: Vec<Histogram> = fitted.docs.iter().take(50).map(|d| d.hist.clone()).collect();
    check(&docs, &fitted.gram);
    let detail = format!(
        "linear min/max eigenvalue ratio {:.2e}; rbf {:.2e}{}",
        worst.0,
        worst.1,
        if rbf_ok { "" } else { " (RBF PSD VIOLATION)" }
    );
    outcome(lin_ok && rbf_ok, detail)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo2, mut hi2) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo3, mut hi3) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut count = 0;
    while count < 1000 {
        let dim = rng.random_range(2..=10);
        // Interior point: every coordinate at least 0.05.
        let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        let floor = 0.05;
        let p: Vec<f64> = raw.iter().map(|r| floor + (1.0 - floor * dim as f64) * r / s).collect();
        if p.iter().any(|&v| v < floor) {
            continue;
        }
        // Below d ≈ 1e-6 the rounding of p and q off the simplex (~1e-16)
        // is no longer small next to KL itself.
        let eps = 10f64.powf(rng.random_range(-5.0..-2.5));
        let mut delta: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = delta.iter().sum::<f64>() / dim as f64;
        delta.iter_mut().for_each(|d| *d = (*d - mean) * eps);
        let q: Vec<f64> = p.iter().zip(&delta).map(|(a, d)| a + d).collect();
        let d = fisher_distance(&p, &q).unwrap();
        if !(d >= 1e-6 && d <= 1e-2) {
            continue;
        }
        let kl = kl_divergence(&p, &q).unwrap().value();
        let ratio = d * d / (2.0 * kl);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        // Same ratio with the full Fisher-Rao geodesic 2·arccos.
        let full = 4.0 * ratio;
        lo2 = lo2.min(full);
        hi2 = hi2.max(full);
        if d <= 1e-4 {
            lo3 = lo3.min(full);
            hi3 = hi3.max(full);
        }
        count += 1;
    }
    let pass = lo >= 0.99 && hi <= 1.01;
    outcome(
        pass,
        format!(
            "d^2/(2 KL) in [{lo:.5}, {hi:.5}] with d = arccos(sum sqrt(pq)); \
             diagnostic (2d)^2/(2 KL) in [{lo2:.5}, {hi2:.5}], [{lo3:.5}, {hi3:.5}] for d <= 1e-4"
        ),
    )
}

fn criterion_7() -> Outcome {
    let f = fit_bundled("synonym");
    let cfg = KnnEvalConfig {
        train_sizes: f.cfg.train_sizes.clone(),
        test_per_class: f.cfg.test_per_class,
        realizations: f.cfg.realizations,
        k: f.cfg.knn_k,
        seed: f.cfg.seed,
    };
    assert_eq!(cfg.realizations, 40);
    let rows = knn_eval(&f.docs, &f.gram, &cfg).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for &size in &cfg.train_sizes {
        let plain = realization_means(&rows, size, "l2");
        let expected = realization_means(&rows, size, "expected-l2");
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (wins, losses, p) = sign_test(&expected, &plain);
        pass &= mean(&expected) < mean(&plain) && p < 0.05;
        notes.push(format!(
            "train {size}: L2 {:.4} vs expected {:.4}, {wins}-{losses}, p = {p:.2e}",
            mean(&plain),
            mean(&expected)
        ));
    }
    let _ = &f.raw;
    outcome(pass, notes.join("; "))
}

/// Plain PCA by SVD of the centered data matrix, scored like the kernel path.
fn plain_pca_scores(
    x: &DMatrix<f64>,
    labels: &[&str],
    train: &[usize],
    test: &[usize],
    dims: &[usize],
) -> Vec<(f64, f64, f64)> {
    let xt = x.select_rows(train);
    let mu = xt.row_mean();
    let centered = DMatrix::from_fn(xt.nrows(), xt.ncols(), |i, j| xt[(i, j)] - mu[j]);
    let svd = centered.clone().svd(false, true);
    let v_t = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sq: Vec<f64> = order.iter().map(|&i| svd.singular_values[i].powi(2)).collect();
    let floor = 1e-10f64.max(sq[0] * train.len() as f64 * f64::EPSILON);
    let total: f64 = sq.iter().filter(|&&v| v > floor).sum();
    dims.iter()
        .map(|&k| {
            let k = k.min(sq.iter().filter(|&&v| v > floor).count());
            let axes: Vec<DVector<f64>> = order[..k].iter().map(|&i| v_t.row(i).transpose()).collect();
            let project = |row: DVector<f64>| DVector::from_iterator(k, axes.iter().map(|a| a.dot(&row)));
            let points: Vec<(&str, DVector<f64>)> = train
                .iter()
                .enumerate()
                .map(|(r, &i)| (labels[i], project(centered.row(r).transpose())))
                .collect();
            let lda = lda_fit(&points, None).unwrap();
            let (mut wrong, mut resid) = (0, 0.0);
            for &q in test {
                let c = (x.row(q) - &mu).transpose();
                let y = project(c.clone());
                if lda.predict(&y).unwrap() != labels[q] {
                    wrong += 1;
                }
                resid += c.norm_squared() - y.norm_squared();
            }
            let var = sq[..k].iter().sum::<f64>() / total;
            (wrong as f64 / test.len() as f64, var, resid / test.len() as f64)
        })
        .collect()
}

/// Independent kernel PCA of a precomputed Gram matrix, scored the same way.
fn plain_kpca_scores(
    k_full: &DMatrix<f64>,
    labels: &[&str],
    train: &[usize],
    test: &[usize],
    dims: &[usize],
) -> Vec<(f64, f64, f64)> {
    let n = train.len();
    let k = k_full.select_rows(train).select_columns(train);
    let one = DMatrix::from_element(n, n, 1.0 / n as f64);
    let kc = &k - &one * &k - &k * &one + &one * &k * &one;
    let eig = SymmetricEigen::new((&kc + kc.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let floor = 1e-10f64.max(eig.eigenvalues.max() * n as f64 * f64::EPSILON);
    let pos: Vec<usize> = order.into_iter().filter(|&i| eig.eigenvalues[i] > floor).collect();
    let total: f64 = pos.iter().map(|&i| eig.eigenvalues[i]).sum();
    let col_mean: Vec<f64> = (0..n).map(|j| k.column(j).mean()).collect();
    let grand = col_mean.iter().sum::<f64>() / n as f64;
    dims.iter()
        .map(|&d| {
            let d = d.min(pos.len());
            let coords = |krow: &[f64]| {
                let m = krow.iter().sum::<f64>() / n as f64;
                let c: Vec<f64> = (0..n).map(|j| krow[j] - col_mean[j] - m + grand).collect();
                DVector::from_iterator(
                    d,
                    pos[..d].iter().map(|&i| {
                        let v = eig.eigenvectors.column(i);
                        v.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() / eig.eigenvalues[i].sqrt()
                    }),
                )
            };
            let points: Vec<(&str, DVector<f64>)> = train
                .iter()
                .map(|&i| {
                    let row: Vec<f64> = train.iter().map(|&j| k_full[(i, j)]).collect();
                    (labels[i], coords(&row))
                })
                .collect();
            let lda = lda_fit(&points, None).unwrap();
            let (mut wrong, mut resid) = (0, 0.0);
            for &q in test {
                let row: Vec<f64> = train.iter().map(|&j| k_full[(q, j)]).collect();
                let y = coords(&row);
                if lda.predict(&y).unwrap() != labels[q] {
                    wrong += 1;
                }
                let m = row.iter().sum::<f64>() / n as f64;
                resid += k_full[(q, q)] - 2.0 * m + grand - y.norm_squared();
            }
            let var = pos[..d].iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / total;
            (wrong as f64 / test.len() as f64, var, resid / test.len() as f64)
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let f = fit_bundled("synonym");
    let cfg = KpcaEvalConfig {
        tasks: f.cfg.kpca_tasks.clone(),
        dims: f.cfg.kpca_dims.clone(),
        splits: 5,
        train_fraction: f.cfg.kpca_train_fraction,
        kernel_sigma: f.cfg.kernel_sigma,
        seed: f.cfg.seed,
    };
    let rows = kpca_eval(&f.docs, &f.gram, &cfg).unwrap();
    let csv = kpca_csv(&rows, cfg.seed);
    let header = csv.lines().next().unwrap();
    let mut pass = ["error_rate", "variance_fraction", "test_residual"].iter().all(|c| header.contains(c));
    pass &= rows.len() == cfg.tasks.len() * 4 * cfg.dims.len();

    // Monotone variance fraction per task and kernel.
    let mut monotone = true;
    for w in rows.windows(2) {
        if w[0].task == w[1].task && w[0].kernel == w[1].kernel {
            monotone &= w[1].variance_fraction >= w[0].variance_fraction - 1e-12;
        }
    }
    pass &= monotone;

    // T = I rows against independent PCA and RBF kernel PCA.
    let m = f.gram.vocab_size();
    let mut worst = 0.0f64;
    let mut error_mismatch = 0;
    for (ti, task) in cfg.tasks.iter().enumerate() {
        let members: Vec<&LabeledDoc> = f.docs.iter().filter(|d| task.contains(&d.label)).collect();
        let labels: Vec<&str> = members.iter().map(|d| d.label.as_str()).collect();
        let x = DMatrix::from_fn(members.len(), m, |i, j| {
            members[i].hist.count(j) as f64 / members[i].hist.total() as f64
        });
        let n = members.len();
        let rbf = DMatrix::from_fn(n, n, |i, j| {
            (-(x.row(i) - x.row(j)).norm_squared() / (cfg.kernel_sigma * cfg.kernel_sigma)).exp()
        });
        let mut acc = [vec![(0.0, 0.0, 0.0); cfg.dims.len()], vec![(0.0, 0.0, 0.0); cfg.dims.len()]];
        for s in 0..cfg.splits {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[ti as u64, s as u64]));
            let (train, test) = stratified_split(&labels, cfg.train_fraction, &mut rng).unwrap();
            let scored = [
                plain_pca_scores(&x, &labels, &train, &test, &cfg.dims),
                plain_kpca_scores(&rbf, &labels, &train, &test, &cfg.dims),
            ];
            for (a, sc) in acc.iter_mut().zip(scored) {
                for (slot, v) in a.iter_mut().zip(sc) {
                    slot.0 += v.0 / cfg.splits as f64;
                    slot.1 += v.1 / cfg.splits as f64;
                    slot.2 += v.2 / cfg.splits as f64;
                }
            }
        }
        let name = task.join("+");
        for (kernel, a) in ["linear", "rbf"].iter().zip(&acc) {
            for (di, &k) in cfg.dims.iter().enumerate() {
                let row = rows.iter().find(|r| r.task == name && r.kernel == *kernel && r.k == k).unwrap();
                if (row.error_rate - a[di].0).abs() > 1e-8 {
                    error_mismatch += 1;
                }
                worst = worst.max((row.variance_fraction - a[di].1).abs());
                worst = worst.max((row.test_residual - a[di].2).abs());
            }
        }
    }
    pass &= worst <= 1e-8 && error_mismatch == 0;

    // Full-rank isometry on an expected-linear kernel.
    let docs: Vec<Histogram> = f.docs.iter().take(40).map(|d| d.hist.clone()).collect();
    let k = kernel_matrix(&docs, &f.gram, KernelKind::Linear).unwrap();
    let model = kpca_fit(&k, docs.len()).unwrap();
    let y = model.train_coords();
    let mut iso = 0.0f64;
    for i in 0..docs.len() {
        for j in 0..docs.len() {
            let want = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
            iso = iso.max(((y.row(i) - y.row(j)).norm_squared() - want).abs());
        }
    }
    pass &= iso <= 1e-6;
    outcome(
        pass,
        format!(
            "{} rows, monotone = {monotone}, T=I vs independent max diff {worst:.1e} \
             ({error_mismatch} error-rate mismatches), isometry err {iso:.1e}",
            rows.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let f = fit_bundled("synonym");
    let corpus = build_corpus(f.raw.clone(), f.cfg.tokenize_options()).unwrap();
    let model = ModelFile::new(corpus.vocabulary().clone(), f.diffusion.translation.clone()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    model.save(&path).unwrap();
    let back = ModelFile::load(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let bit_exact = back.to_bytes() == bytes
        && back.translation.block().iter().zip(model.translation.block().iter()).all(|(a, b)| a.to_bits() == b.to_bits())
        && back.gram.block().iter().zip(model.gram.block().iter()).all(|(a, b)| a.to_bits() == b.to_bits());

    let mut corrupt = bytes.clone();
    corrupt[3] ^= 0x20;
    let bad = dir.path().join("bad.bin");
    std::fs::write(&bad, &corrupt).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_semdist"))
        .args(["dist", "--metric", "expected-l2", "-m"])
        .arg(&bad)
        .args(["kodozin", "fifob"])
        .output()
        .unwrap();
    let code = status.status.code();
    outcome(
        bit_exact && code == Some(2),
        format!("round trip bit-exact = {bit_exact}; corrupted magic exit code = {code:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("closed form vs Monte-Carlo", criterion_1),
        ("reduction to Euclidean at T = I", criterion_2),
        ("hand-verified two-word instance", criterion_3),
        ("spectral invariants", criterion_4),
        ("kernel validity", criterion_5),
        ("information-geometry limit", criterion_6),
        ("nearest-neighbor direction of effect", criterion_7),
        ("kernel PCA structure", criterion_8),
        ("persistence", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {}. {name}: {} ({:.1}s)", i + 1, o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
