//! Flat `key = value` run configuration.

use std::path::PathBuf;

use crate::corpus::TokenizeOptions;
use crate::diffusion::DiffusionParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    /// Edge-weight scale; `None` = median pairwise Fisher distance.
    pub sigma: Option<f64>,
    pub t: f64,
    /// Frequent words excluded from translation; `None` = min(2000, 10% of vocabulary).
    pub exclude: Option<usize>,
    pub sparsify_k: usize,
    pub sigma_pairs: usize,
    pub stem: bool,
    pub min_len: usize,
    pub kernel_sigma: f64,
    pub knn_k: usize,
    pub kpca_dims: Vec<usize>,
    /// Task label groups for kernel PCA; empty = one task with every label.
    pub kpca_tasks: Vec<Vec<String>>,
    pub kpca_splits: usize,
    pub kpca_train_fraction: f64,
    /// Total (balanced) training sizes for the kNN tasks.
    pub train_sizes: Vec<usize>,
    pub test_per_class: usize,
    pub realizations: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            sigma: None,
            t: 1.0,
            exclude: None,
            sparsify_k: 0,
            sigma_pairs: 1000,
            stem: false,
            min_len: 2,
            kernel_sigma: 1.0,
            knn_k: 1,
            kpca_dims: vec![1, 2, 5, 10],
            kpca_tasks: Vec::new(),
            kpca_splits: 25,
            kpca_train_fraction: 0.7,
            train_sizes: vec![10, 20, 40],
            test_per_class: 40,
            realizations: 40,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "corpus",
    "sigma",
    "t",
    "exclude",
    "sparsify_k",
    "sigma_pairs",
    "stem",
    "min_len",
    "kernel_sigma",
    "knn_k",
    "kpca_dims",
    "kpca_tasks",
    "kpca_splits",
    "kpca_train_fraction",
    "train_sizes",
    "test_per_class",
    "realizations",
    "seed",
    "output_dir",
];

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn auto_or<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected key = value".into(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key from its textual value. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "corpus" => self.corpus = Some(PathBuf::from(value)),
            "sigma" => self.sigma = auto_or(key, value)?,
            "t" => self.t = num(key, value)?,
            "exclude" => self.exclude = auto_or(key, value)?,
            "sparsify_k" => self.sparsify_k = num(key, value)?,
            "sigma_pairs" => self.sigma_pairs = num(key, value)?,
            "stem" => self.stem = num(key, value)?,
            "min_len" => self.min_len = num(key, value)?,
            "kernel_sigma" => self.kernel_sigma = num(key, value)?,
            "knn_k" => self.knn_k = num(key, value)?,
            "kpca_dims" => self.kpca_dims = list(key, value)?,
            "kpca_tasks" => {
                self.kpca_tasks = value
                    .split(';')
                    .map(|group| {
                        group.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
                    })
                    .filter(|g: &Vec<String>| !g.is_empty())
                    .collect()
            }
            "kpca_splits" => self.kpca_splits = num(key, value)?,
            "kpca_train_fraction" => self.kpca_train_fraction = num(key, value)?,
            "train_sizes" => self.train_sizes = list(key, value)?,
            "test_per_class" => self.test_per_class = num(key, value)?,
            "realizations" => self.realizations = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("sigma must be positive, got {s}"));
            }
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return bad(format!("t must be nonnegative, got {}", self.t));
        }
        if !(self.kernel_sigma > 0.0 && self.kernel_sigma.is_finite()) {
            return bad(format!("kernel_sigma must be positive, got {}", self.kernel_sigma));
        }
        if !(self.kpca_train_fraction > 0.0 && self.kpca_train_fraction < 1.0) {
            return bad(format!("kpca_train_fraction must be in (0, 1), got {}", self.kpca_train_fraction));
        }
        for (name, v) in [
            ("min_len", self.min_len),
            ("knn_k", self.knn_k),
            ("sigma_pairs", self.sigma_pairs),
            ("kpca_splits", self.kpca_splits),
            ("test_per_class", self.test_per_class),
            ("realizations", self.realizations),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.kpca_dims.is_empty() || self.kpca_dims.contains(&0) {
            return bad("kpca_dims must be a nonempty list of positive sizes".into());
        }
        if self.train_sizes.is_empty() || self.train_sizes.iter().any(|&s| s < 2 || s % 2 != 0) {
            return bad("train_sizes must be even sizes >= 2 (balanced binary tasks)".into());
        }
        Ok(())
    }

    pub fn tokenize_options(&self) -> TokenizeOptions {
        TokenizeOptions { min_len: self.min_len, stem: self.stem }
    }

    pub fn diffusion_params(&self) -> DiffusionParams {
        DiffusionParams {
            sigma: self.sigma,
            t: self.t,
            exclude: self.exclude,
            sparsify_k: self.sparsify_k,
            sigma_pairs: self.sigma_pairs,
            seed: self.seed,
        }
    }
}
