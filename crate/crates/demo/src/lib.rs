//! Browser demo: fit a translation model on a small labeled corpus and
//! explore it. Every query returns a JSON string for the page script.

use nalgebra::DMatrix;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use semdist::corpus::{read_tsv, write_tsv, RawDocument, TokenizeOptions, Tokenizer};
use semdist::diffusion::{nearest_words, Diffusion, DiffusionParams};
use semdist::eval::{encode_labeled, LabeledDoc};
use semdist::expected::{kernel_matrix, KernelKind};
use semdist::geometry::sparse_euclidean_sq;
use semdist::learn::kpca_fit;
use semdist::synth::{generate, SynthSpec};
use semdist::{
    build_corpus, estimate_contextual, expected_linear_kernel, expected_rbf_kernel, expected_sq_l2, fit_translation,
    precompute_gram, ContextualModel, GramModel, Histogram, TranslationModel,
};

/// The bundled synonym corpus as `id<TAB>label<TAB>text` lines.
#[wasm_bindgen]
pub fn synonym_corpus() -> String {
    let (_, docs) = generate(&SynthSpec::synonym());
    let mut out = Vec::new();
    write_tsv(&mut out, &docs).expect("writing to memory");
    String::from_utf8(out).expect("generated text is ASCII")
}

fn err(e: semdist::Error) -> String {
    e.to_string()
}

#[wasm_bindgen]
pub struct Explorer {
    options: TokenizeOptions,
    contextual: ContextualModel,
    diffusion: Diffusion,
    translation: TranslationModel,
    gram: GramModel,
    docs: Vec<LabeledDoc>,
}

#[wasm_bindgen]
impl Explorer {
    /// Fits on TSV text. `sigma <= 0` picks the median pairwise distance.
    #[wasm_bindgen(constructor)]
    pub fn new(tsv: &str, sigma: f64, t: f64) -> Result<Explorer, String> {
        let raw: Vec<RawDocument> = read_tsv(tsv.as_bytes()).map_err(err)?;
        let options = TokenizeOptions::default();
        let corpus = build_corpus(raw.clone(), options).map_err(err)?;
        let contextual = estimate_contextual(&corpus).map_err(err)?;
        let params = DiffusionParams { sigma: (sigma > 0.0).then_some(sigma), t, ..Default::default() };
        let diffusion = fit_translation(&contextual, &params).map_err(err)?;
        let translation = diffusion.translation.clone();
        let gram = precompute_gram(&translation);
        let docs = encode_labeled(&raw, corpus.vocabulary(), &Tokenizer::new(options)).docs;
        Ok(Explorer { options, contextual, diffusion, translation, gram, docs })
    }

    /// Re-diffuses at time `t` without refitting the graph.
    pub fn set_time(&mut self, t: f64) -> Result<(), String> {
        self.translation = self.diffusion.at_time(t).map_err(err)?;
        self.gram = precompute_gram(&self.translation);
        Ok(())
    }

    pub fn summary(&self) -> String {
        let vocab = self.contextual.vocabulary();
        let excluded: Vec<&str> =
            self.translation.excluded().iter().filter_map(|&id| vocab.term(id)).collect();
        json!({
            "vocabulary": vocab.len(),
            "documents": self.docs.len(),
            "excluded": excluded,
            "sigma": self.translation.sigma(),
            "t": self.translation.t(),
            "min_eigenvalue": self.diffusion.spectrum.min_eigenvalue(),
            "max_eigenvalue": self.diffusion.spectrum.max_eigenvalue(),
        })
        .to_string()
    }

    /// Nearest words by edge weight and the word's top translations.
    pub fn word(&self, word: &str, n: usize) -> Result<String, String> {
        let vocab = self.contextual.vocabulary();
        let id = self.contextual.resolve(word.trim()).map_err(err)?;
        let neighbors: Vec<Value> = if self.translation.is_excluded(id) {
            Vec::new()
        } else {
            nearest_words(&self.contextual, self.translation.included(), id, n, self.translation.sigma())
                .map_err(err)?
                .into_iter()
                .map(|(w, e)| json!({ "word": w, "weight": e }))
                .collect()
        };
        let mut row = self.translation.row(id);
        row.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let translations: Vec<Value> = row
            .into_iter()
            .take(n)
            .map(|(v, p)| json!({ "word": vocab.term(v).unwrap_or("?"), "probability": p }))
            .collect();
        Ok(json!({
            "word": vocab.term(id),
            "excluded": self.translation.is_excluded(id),
            "neighbors": neighbors,
            "translations": translations,
        })
        .to_string())
    }

    /// Plain and expected distances and kernels between two texts.
    pub fn compare(&self, a: &str, b: &str, kernel_sigma: f64) -> Result<String, String> {
        let x = self.encode(a)?;
        let w = self.encode(b)?;
        let e = |r: semdist::Result<f64>| r.map_err(err);
        Ok(json!({
            "l2": sparse_euclidean_sq(&x.normalized(), &w.normalized()),
            "expected_l2": e(expected_sq_l2(&x, &w, &self.gram))?,
            "expected_linear": e(expected_linear_kernel(&x, &w, &self.gram))?,
            "expected_rbf": e(expected_rbf_kernel(&x, &w, &self.gram, kernel_sigma))?,
        })
        .to_string())
    }

    /// Two-component kernel PCA of every document, plain and expected.
    pub fn scatter(&self, max_docs: usize) -> Result<String, String> {
        let docs: Vec<&LabeledDoc> = self.docs.iter().take(max_docs).collect();
        let hists: Vec<Histogram> = docs.iter().map(|d| d.hist.clone()).collect();
        let plain = GramModel::identity(self.gram.vocab_size());
        let embed = |gram: &GramModel| -> Result<Vec<[f64; 2]>, String> {
            let k = kernel_matrix(&hists, gram, KernelKind::Linear).map_err(err)?;
            let model = kpca_fit(&k, 2).map_err(err)?;
            Ok(coords(model.train_coords()))
        };
        let (p, e) = (embed(&plain)?, embed(&self.gram)?);
        let points: Vec<Value> = docs
            .iter()
            .zip(p.iter().zip(&e))
            .map(|(d, (p, e))| json!({ "id": d.id, "label": d.label, "plain": p, "expected": e }))
            .collect();
        Ok(Value::Array(points).to_string())
    }
}

impl Explorer {
    fn encode(&self, text: &str) -> Result<Histogram, String> {
        let tokens = Tokenizer::new(self.options).tokenize(text);
        let enc = self.contextual.vocabulary().encode(&tokens);
        Histogram::from_tokens(&enc.ids).map_err(err)
    }
}

fn coords(y: &DMatrix<f64>) -> Vec<[f64; 2]> {
    (0..y.nrows())
        .map(|i| [y.get((i, 0)).copied().unwrap_or(0.0), y.get((i, 1)).copied().unwrap_or(0.0)])
        .collect()
}
