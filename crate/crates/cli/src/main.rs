use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semdist::config::RunConfig;
use semdist::corpus::{read_tsv, write_tsv, Document, RawDocument, Tokenizer};
use semdist::diffusion::nearest_words;
use semdist::eval::{
    encode_labeled, knn_csv, knn_eval, kpca_csv, kpca_eval, realization_means, sign_test, KnnEvalConfig,
    KpcaEvalConfig, KNN_METRICS,
};
use semdist::expected::sample_translation;
use semdist::geometry::sparse_euclidean_sq;
use semdist::synth::{generate, SynthSpec};
use semdist::{build_corpus, estimate_contextual, fit_translation, Error, Histogram, ModelFile};

#[derive(Parser)]
#[command(name = "semdist", version, about = "Heat-kernel word translation and expected document distances")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Per-key overrides of the configuration file.
#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    corpus: Option<String>,
    /// Edge-weight scale, or `auto`.
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// Diffusion time.
    #[arg(long, global = true)]
    t: Option<String>,
    /// Number of frequent words left untranslated, or `auto`.
    #[arg(long, global = true)]
    exclude: Option<String>,
    #[arg(long, global = true)]
    sparsify_k: Option<String>,
    #[arg(long, global = true)]
    sigma_pairs: Option<String>,
    #[arg(long, global = true)]
    stem: Option<String>,
    #[arg(long, global = true)]
    min_len: Option<String>,
    #[arg(long, global = true)]
    kernel_sigma: Option<String>,
    #[arg(long, global = true)]
    knn_k: Option<String>,
    #[arg(long, global = true)]
    kpca_dims: Option<String>,
    #[arg(long, global = true)]
    kpca_tasks: Option<String>,
    #[arg(long, global = true)]
    kpca_splits: Option<String>,
    #[arg(long, global = true)]
    kpca_train_fraction: Option<String>,
    #[arg(long, global = true)]
    train_sizes: Option<String>,
    #[arg(long, global = true)]
    test_per_class: Option<String>,
    #[arg(long, global = true)]
    realizations: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    output_dir: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 19] {
        [
            ("corpus", &self.corpus),
            ("sigma", &self.sigma),
            ("t", &self.t),
            ("exclude", &self.exclude),
            ("sparsify_k", &self.sparsify_k),
            ("sigma_pairs", &self.sigma_pairs),
            ("stem", &self.stem),
            ("min_len", &self.min_len),
            ("kernel_sigma", &self.kernel_sigma),
            ("knn_k", &self.knn_k),
            ("kpca_dims", &self.kpca_dims),
            ("kpca_tasks", &self.kpca_tasks),
            ("kpca_splits", &self.kpca_splits),
            ("kpca_train_fraction", &self.kpca_train_fraction),
            ("train_sizes", &self.train_sizes),
            ("test_per_class", &self.test_per_class),
            ("realizations", &self.realizations),
            ("seed", &self.seed),
            ("output_dir", &self.output_dir),
        ]
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a translation model on the corpus and save it.
    Fit {
        /// Output path (default: <output_dir>/model.bin).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Most similar words by graph edge weight.
    Neighbors {
        #[arg(short, long)]
        model: PathBuf,
        word: String,
        #[arg(short, default_value_t = 8)]
        n: usize,
    },
    /// Distance or kernel between two texts.
    Dist {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Metric::ExpectedL2)]
        metric: Metric,
        a: String,
        b: String,
    },
    /// Balanced 1-vs-all nearest-neighbor error, plain vs expected L2.
    KnnEval {
        #[arg(short, long)]
        model: PathBuf,
    },
    /// Kernel PCA evaluation with expected and plain kernels.
    KpcaEval {
        #[arg(short, long)]
        model: PathBuf,
    },
    /// Print one random translation of a text.
    Sample {
        #[arg(short, long)]
        model: PathBuf,
        text: String,
    },
    /// Write a generated labeled corpus.
    Synth {
        #[arg(value_enum)]
        kind: SynthKind,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    L2,
    ExpectedL2,
    ExpectedLinear,
    ExpectedRbf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Synonym,
    Null,
}

enum Failure {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            e => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for (key, value) in cli.overrides.pairs() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_corpus(cfg: &RunConfig) -> Result<Vec<RawDocument>, Failure> {
    let path = cfg.corpus.as_ref().ok_or_else(|| Failure::Usage("no corpus given (--corpus or config)".into()))?;
    let file = File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(read_tsv(BufReader::new(file))?)
}

fn load_model(path: &Path) -> Result<ModelFile, Failure> {
    ModelFile::load(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Formats with 12 significant digits.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn encode_text(text: &str, model: &ModelFile, tokenizer: &Tokenizer) -> Result<Histogram, Failure> {
    let enc = model.vocabulary.encode(&tokenizer.tokenize(text));
    if enc.skipped > 0 {
        eprintln!("note: {} token(s) not in the model vocabulary were skipped", enc.skipped);
    }
    Ok(Histogram::from_tokens(&enc.ids)?)
}

fn run(cli: Cli) -> Outcome {
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Fit { output } => cmd_fit(&cfg, output),
        Command::Neighbors { model, word, n } => cmd_neighbors(&cfg, &model, &word, n),
        Command::Dist { model, metric, a, b } => cmd_dist(&cfg, &model, metric, &a, &b),
        Command::KnnEval { model } => cmd_knn_eval(&cfg, &model),
        Command::KpcaEval { model } => cmd_kpca_eval(&cfg, &model),
        Command::Sample { model, text } => cmd_sample(&cfg, &model, &text),
        Command::Synth { kind, output } => {
            let spec = match kind {
                SynthKind::Synonym => SynthSpec::synonym(),
                SynthKind::Null => SynthSpec::null(),
            };
            let (_, docs) = generate(&spec);
            let mut out = std::io::BufWriter::new(File::create(&output)?);
            write_tsv(&mut out, &docs)?;
            out.flush()?;
            println!("wrote {} documents to {}", docs.len(), output.display());
            Ok(())
        }
    }
}

fn cmd_fit(cfg: &RunConfig, output: Option<PathBuf>) -> Outcome {
    let start = Instant::now();
    let raw = read_corpus(cfg)?;
    let corpus = build_corpus(raw, cfg.tokenize_options())?;
    let ctx = estimate_contextual(&corpus)?;
    let fit = fit_translation(&ctx, &cfg.diffusion_params())?;
    let model = ModelFile::new(corpus.vocabulary().clone(), fit.translation)?;
    let path = output.unwrap_or_else(|| cfg.output_dir.join("model.bin"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    model.save(&path)?;
    println!("documents\t{}", corpus.len());
    println!("vocabulary\t{}", model.vocabulary.len());
    println!("excluded\t{}", model.translation.excluded().len());
    println!("sigma\t{}", sig12(model.translation.sigma()));
    println!("t\t{}", sig12(model.translation.t()));
    println!("min_eigenvalue\t{}", sig12(fit.spectrum.min_eigenvalue()));
    println!("max_eigenvalue\t{}", sig12(fit.spectrum.max_eigenvalue()));
    println!("model\t{}", path.display());
    println!("seconds\t{:.3}", start.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_neighbors(cfg: &RunConfig, path: &Path, word: &str, n: usize) -> Outcome {
    let model = load_model(path)?;
    let corpus = build_corpus(read_corpus(cfg)?, cfg.tokenize_options())?;
    if corpus.vocabulary().terms() != model.vocabulary.terms() {
        return Err(Failure::Data("corpus vocabulary does not match the model".into()));
    }
    let ctx = estimate_contextual(&corpus)?;
    let word = Tokenizer::new(cfg.tokenize_options())
        .tokenize(word)
        .into_iter()
        .next()
        .unwrap_or_else(|| word.to_lowercase());
    let rows = nearest_words(&ctx, model.translation.included(), word.as_str(), n, model.translation.sigma())?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "rank\tword\tweight")?;
    for (i, (w, e)) in rows.iter().enumerate() {
        writeln!(out, "{}\t{w}\t{}", i + 1, sig12(*e))?;
    }
    Ok(())
}

fn cmd_dist(cfg: &RunConfig, path: &Path, metric: Metric, a: &str, b: &str) -> Outcome {
    let model = load_model(path)?;
    let tokenizer = Tokenizer::new(cfg.tokenize_options());
    let x = encode_text(a, &model, &tokenizer)?;
    let w = encode_text(b, &model, &tokenizer)?;
    let value = match metric {
        Metric::L2 => sparse_euclidean_sq(&x.normalized(), &w.normalized()),
        Metric::ExpectedL2 => semdist::expected_sq_l2(&x, &w, &model.gram)?,
        Metric::ExpectedLinear => semdist::expected_linear_kernel(&x, &w, &model.gram)?,
        Metric::ExpectedRbf => semdist::expected_rbf_kernel(&x, &w, &model.gram, cfg.kernel_sigma)?,
    };
    println!("{}", sig12(value));
    Ok(())
}

fn write_output(cfg: &RunConfig, name: &str, text: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn labeled_docs(cfg: &RunConfig, model: &ModelFile) -> Result<Vec<semdist::eval::LabeledDoc>, Failure> {
    let raw = read_corpus(cfg)?;
    let set = encode_labeled(&raw, &model.vocabulary, &Tokenizer::new(cfg.tokenize_options()));
    if !set.dropped.is_empty() {
        eprintln!("note: {} unlabeled or empty document(s) dropped", set.dropped.len());
    }
    Ok(set.docs)
}

fn cmd_knn_eval(cfg: &RunConfig, path: &Path) -> Outcome {
    let model = load_model(path)?;
    let docs = labeled_docs(cfg, &model)?;
    let eval_cfg = KnnEvalConfig {
        train_sizes: cfg.train_sizes.clone(),
        test_per_class: cfg.test_per_class,
        realizations: cfg.realizations,
        k: cfg.knn_k,
        seed: cfg.seed,
    };
    let rows = knn_eval(&docs, &model.gram, &eval_cfg)?;
    let csv = knn_csv(&rows, cfg.seed);
    let out = write_output(cfg, "knn.csv", &csv)?;
    print!("{csv}");
    println!();
    println!("train_size\tl2\texpected_l2\twins\tlosses\tp_one_sided");
    for &size in &cfg.train_sizes {
        let plain = realization_means(&rows, size, KNN_METRICS[0]);
        let expected = realization_means(&rows, size, KNN_METRICS[1]);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (wins, losses, p) = sign_test(&expected, &plain);
        println!("{size}\t{:.4}\t{:.4}\t{wins}\t{losses}\t{}", mean(&plain), mean(&expected), sig12(p));
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_kpca_eval(cfg: &RunConfig, path: &Path) -> Outcome {
    let model = load_model(path)?;
    let docs = labeled_docs(cfg, &model)?;
    let eval_cfg = KpcaEvalConfig {
        tasks: cfg.kpca_tasks.clone(),
        dims: cfg.kpca_dims.clone(),
        splits: cfg.kpca_splits,
        train_fraction: cfg.kpca_train_fraction,
        kernel_sigma: cfg.kernel_sigma,
        seed: cfg.seed,
    };
    let rows = kpca_eval(&docs, &model.gram, &eval_cfg)?;
    let csv = kpca_csv(&rows, cfg.seed);
    let out = write_output(cfg, "kpca.csv", &csv)?;
    print!("{csv}");
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_sample(cfg: &RunConfig, path: &Path, text: &str) -> Outcome {
    let model = load_model(path)?;
    let tokenizer = Tokenizer::new(cfg.tokenize_options());
    let enc = model.vocabulary.encode(&tokenizer.tokenize(text));
    if enc.ids.is_empty() {
        return Err(Error::EmptyDocument.into());
    }
    let doc = Document { id: String::new(), label: None, tokens: enc.ids };
    let out = sample_translation(&doc, &model.translation, cfg.seed)?;
    let words: Vec<&str> = out.tokens.iter().map(|&id| model.vocabulary.term(id).unwrap_or("?")).collect();
    println!("{}", words.join(" "));
    Ok(())
}
