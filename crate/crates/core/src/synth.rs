//! Generated labeled corpora for desk-scale experiments.
//!
//! Every class owns a few concepts, and each concept can be written with one
//! of several interchangeable synonyms. A document picks one register (one
//! synonym index) and writes every concept with that synonym, so two
//! documents of the same class in different registers share no topic word.
//! A document focuses on a few concepts of its class and mixes in their
//! context words, which every register uses. Synonyms thus occur next to the
//! same context words, their contextual distributions nearly coincide, and
//! translation can recover the shared meaning. A global pool of background
//! words with a Zipf-like profile supplies the frequent words.
//!
//! With `synonyms = 1` there is no synonym structure at all (the null corpus).

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::RawDocument;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub classes: usize,
    pub concepts_per_class: usize,
    pub synonyms: usize,
    /// Size of each class's pool of register-independent context words.
    pub context_words: usize,
    /// Context words drawn from the class pool for each concept.
    pub context_per_concept: usize,
    /// Distinct concepts a document talks about.
    pub concepts_per_doc: usize,
    pub background_words: usize,
    pub docs_per_class: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability that a token is a topic word rather than a background word.
    pub topic_share: f64,
    /// Probability that a token is a context word of a focus concept.
    pub context_share: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Synonym-planted corpus: 4 classes, 5 concepts each, synonym pairs.
    pub fn synonym() -> Self {
        Self {
            classes: 4,
            concepts_per_class: 5,
            synonyms: 2,
            context_words: 20,
            context_per_concept: 2,
            concepts_per_doc: 1,
            background_words: 30,
            docs_per_class: 160,
            min_len: 6,
            max_len: 12,
            topic_share: 0.2,
            context_share: 0.55,
            seed: 20070101,
        }
    }

    /// Same layout without synonyms; vocabulary size kept comparable.
    pub fn null() -> Self {
        Self { synonyms: 1, concepts_per_class: 10, seed: 20070102, ..Self::synonym() }
    }
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push(*CONSONANTS.choose(rng).unwrap() as char);
        w.push(*VOWELS.choose(rng).unwrap() as char);
    }
    w.push(*CONSONANTS.choose(rng).unwrap() as char);
    w
}

/// Class label of class `i`.
pub fn class_label(i: usize) -> String {
    format!("class{i}")
}

/// The generated vocabulary, grouped the way documents use it.
#[derive(Debug, Clone)]
pub struct SynthLexicon {
    /// `topics[class][concept]` = synonyms of that concept.
    pub topics: Vec<Vec<Vec<String>>>,
    /// `context[class][concept]` = words shared by every synonym of the concept.
    pub context: Vec<Vec<Vec<String>>>,
    pub background: Vec<String>,
}

pub fn lexicon(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> SynthLexicon {
    let mut used = HashSet::new();
    let mut fresh = |rng: &mut ChaCha8Rng| loop {
        let w = pseudo_word(rng);
        if used.insert(w.clone()) {
            return w;
        }
    };
    let topics: Vec<Vec<Vec<String>>> = (0..spec.classes)
        .map(|_| {
            (0..spec.concepts_per_class)
                .map(|_| (0..spec.synonyms).map(|_| fresh(rng)).collect())
                .collect()
        })
        .collect();
    let context = (0..spec.classes)
        .map(|_| {
            let pool: Vec<String> = (0..spec.context_words).map(|_| fresh(rng)).collect();
            let k = spec.context_per_concept.min(pool.len());
            (0..spec.concepts_per_class)
                .map(|_| pool.choose_multiple(rng, k).cloned().collect())
                .collect()
        })
        .collect();
    let background = (0..spec.background_words).map(|_| fresh(rng)).collect();
    SynthLexicon { topics, context, background }
}

pub fn generate(spec: &SynthSpec) -> (SynthLexicon, Vec<RawDocument>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lex = lexicon(spec, &mut rng);
    let zipf: Vec<f64> = (0..lex.background.len()).map(|r| 1.0 / (r + 1) as f64).collect();
    let zipf_total: f64 = zipf.iter().sum();

    let mut docs = Vec::new();
    for i in 0..spec.docs_per_class {
        for (c, concepts) in lex.topics.iter().enumerate() {
            let len = rng.random_range(spec.min_len..=spec.max_len);
            let register = rng.random_range(0..spec.synonyms);
            let focus = rand::seq::index::sample(&mut rng, concepts.len(), spec.concepts_per_doc.clamp(1, concepts.len()));
            let focus: Vec<usize> = focus.into_iter().collect();
            let mut words = Vec::with_capacity(len);
            for _ in 0..len {
                let u = rng.random::<f64>();
                let k = *focus.choose(&mut rng).unwrap();
                if lex.background.is_empty() || u < spec.topic_share {
                    words.push(concepts[k][register].as_str());
                } else if u < spec.topic_share + spec.context_share && !lex.context[c][k].is_empty() {
                    words.push(lex.context[c][k].choose(&mut rng).unwrap().as_str());
                } else {
                    let mut r = rng.random::<f64>() * zipf_total;
                    let mut k = 0;
                    while k + 1 < zipf.len() && r >= zipf[k] {
                        r -= zipf[k];
                        k += 1;
                    }
                    words.push(lex.background[k].as_str());
                }
            }
            let id = format!("doc{:05}", i * spec.classes + c);
            docs.push(RawDocument::new(id, Some(&class_label(c)), words.join(" ")));
        }
    }
    (lex, docs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let spec = SynthSpec { docs_per_class: 5, ..SynthSpec::synonym() };
        let (lex, a) = generate(&spec);
        let (_, b) = generate(&spec);
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert_eq!(lex.topics.len(), 4);
        assert!(lex.topics.iter().flatten().all(|s| s.len() == 2));
        assert!(lex.context.iter().flatten().all(|c| c.len() == 2));
        for d in &a {
            let n = d.text.split(' ').count();
            assert!((6..=12).contains(&n));
            assert!(d.text.chars().all(|c| c.is_ascii_lowercase() || c == ' '));
        }
    }
}
