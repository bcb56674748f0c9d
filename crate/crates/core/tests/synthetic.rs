use std::path::PathBuf;

use semdist::config::RunConfig;
use semdist::corpus::Tokenizer;
use semdist::diffusion::nearest_words;
use semdist::eval::{encode_labeled, knn_eval, realization_means, sign_test, KnnEvalConfig};
use semdist::synth::{generate, SynthSpec};
use semdist::{build_corpus, estimate_contextual, fit_translation, precompute_gram};

fn config(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/{name}.conf"));
    RunConfig::load(path).unwrap()
}

#[test]
fn planted_synonyms_are_mutual_nearest_words() {
    let cfg = config("synonym");
    let (lex, raw) = generate(&SynthSpec::synonym());
    let ctx = estimate_contextual(&build_corpus(raw, cfg.tokenize_options()).unwrap()).unwrap();
    let fit = fit_translation(&ctx, &cfg.diffusion_params()).unwrap();
    let included = fit.translation.included();
    let sigma = fit.translation.sigma();
    let mut pairs = 0;
    for concepts in &lex.topics {
        for syn in concepts {
            for a in syn {
                let top: Vec<String> =
                    nearest_words(&ctx, included, a.as_str(), 3, sigma).unwrap().into_iter().map(|x| x.0).collect();
                for b in syn.iter().filter(|b| *b != a) {
                    assert!(top.contains(b), "{b} not in top-3 of {a}: {top:?}");
                    pairs += 1;
                }
            }
        }
    }
    assert!(pairs > 0);
}

#[test]
fn null_corpus_expected_l2_not_significantly_worse() {
    let cfg = config("null");
    let (_, raw) = generate(&SynthSpec::null());
    let corpus = build_corpus(raw.clone(), cfg.tokenize_options()).unwrap();
    let ctx = estimate_contextual(&corpus).unwrap();
    let gram = precompute_gram(&fit_translation(&ctx, &cfg.diffusion_params()).unwrap().translation);
    let docs = encode_labeled(&raw, corpus.vocabulary(), &Tokenizer::new(cfg.tokenize_options())).docs;
    let knn = KnnEvalConfig { train_sizes: vec![20], test_per_class: 40, realizations: 40, k: 1, seed: 0 };
    let rows = knn_eval(&docs, &gram, &knn).unwrap();
    // Expected L2 losing is the alternative here.
    let (_, _, p) = sign_test(&realization_means(&rows, 20, "l2"), &realization_means(&rows, 20, "expected-l2"));
    assert!(p >= 0.05, "expected-l2 significantly worse on the null corpus, p = {p}");
}
