//! Text ingestion: tokenization, vocabulary, documents and term frequencies.
//!
//! Word ids are zero-based and contiguous in order of first appearance.
//! Once a [`Corpus`] is built its vocabulary is frozen; later text is encoded
//! against it and unseen tokens are skipped (and counted).

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use rust_stemmers::{Algorithm, Stemmer};

use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizeOptions {
    /// Tokens with fewer characters than this are dropped.
    pub min_len: usize,
    /// Apply English (Porter-family) stemming.
    pub stem: bool,
}

impl Default for TokenizeOptions {
    fn default() -> Self {
        Self { min_len: 2, stem: false }
    }
}

/// Reusable tokenizer; holds the stemmer so it is built only once.
pub struct Tokenizer {
    options: TokenizeOptions,
    stemmer: Option<Stemmer>,
}

impl Tokenizer {
    pub fn new(options: TokenizeOptions) -> Self {
        let stemmer = options.stem.then(|| Stemmer::create(Algorithm::English));
        Self { options, stemmer }
    }

    pub fn options(&self) -> TokenizeOptions {
        self.options
    }

    pub fn tokenize(&self, raw_text: &str) -> Vec<String> {
        raw_text
            .split(|c: char| !c.is_alphabetic())
            .filter(|s| s.chars().count() >= self.options.min_len)
            .map(|s| {
                let lower = s.to_lowercase();
                match &self.stemmer {
                    Some(stemmer) => stemmer.stem(&lower).into_owned(),
                    None => lower,
                }
            })
            .collect()
    }
}

/// Lowercased alphabetic tokens, short tokens dropped, optionally stemmed.
pub fn tokenize(raw_text: &str, options: TokenizeOptions) -> Vec<String> {
    Tokenizer::new(options).tokenize(raw_text)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from stored terms and document frequencies.
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                found: doc_freq.len(),
            });
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (id, term) in terms.iter().enumerate() {
            if index.insert(term.clone(), id).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate term {term:?}")));
            }
        }
        Ok(Self { terms, index, doc_freq })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    fn intern(&mut self, term: &str) -> usize {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = self.terms.len();
        self.terms.push(term.to_owned());
        self.index.insert(term.to_owned(), id);
        self.doc_freq.push(0);
        id
    }

    /// Maps tokens to ids, skipping tokens outside the vocabulary.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Encoded {
        let mut ids = Vec::with_capacity(tokens.len());
        let mut skipped = 0;
        for tok in tokens {
            match self.id(tok.as_ref()) {
                Some(id) => ids.push(id),
                None => skipped += 1,
            }
        }
        Encoded { ids, skipped }
    }

    /// The `n` ids with the highest document frequency, ties broken by id.
    pub fn most_frequent(&self, n: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.len()).collect();
        ids.sort_by(|&a, &b| self.doc_freq[b].cmp(&self.doc_freq[a]).then(a.cmp(&b)));
        ids.truncate(n);
        ids.sort_unstable();
        ids
    }
}

/// Result of encoding text against a frozen vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub ids: Vec<usize>,
    /// Tokens that were not in the vocabulary.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub label: Option<String>,
    pub tokens: Vec<usize>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Bag-of-words counts of a document.
///
/// Ordering is lexicographic on the counts and is only used to pick a
/// canonical argument order for symmetric computations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Histogram {
    counts: BTreeMap<usize, usize>,
    total: usize,
}

impl Histogram {
    pub fn from_tokens(tokens: &[usize]) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyDocument);
        }
        let mut counts = BTreeMap::new();
        for &t in tokens {
            *counts.entry(t).or_insert(0) += 1;
        }
        Ok(Self { counts, total: tokens.len() })
    }

    pub fn counts(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn count(&self, id: usize) -> usize {
        self.counts.get(&id).copied().unwrap_or(0)
    }

    /// Largest word id present.
    pub fn max_id(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// Sparse relative frequencies (the tf / maximum-likelihood estimate).
    pub fn normalized(&self) -> Vec<(usize, f64)> {
        let n = self.total as f64;
        self.counts.iter().map(|(&id, &c)| (id, c as f64 / n)).collect()
    }

    /// Dense relative frequencies over a vocabulary of size `dim`.
    pub fn to_simplex(&self, dim: usize) -> Result<SimplexPoint> {
        if self.max_id() >= dim {
            return Err(Error::VocabMismatch { id: self.max_id(), size: dim });
        }
        let mut coords = vec![0.0; dim];
        for (id, p) in self.normalized() {
            coords[id] = p;
        }
        SimplexPoint::new(coords)
    }
}

pub fn histogram(doc: &Document) -> Result<Histogram> {
    Histogram::from_tokens(&doc.tokens)
}

/// One input record before tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub label: Option<String>,
    pub text: String,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, label: Option<&str>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.map(str::to_owned),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    tf: Vec<Vec<(usize, f64)>>,
    dropped: Vec<String>,
}

impl Corpus {
    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    /// Sparse tf row of document `doc`, sorted by word id.
    pub fn tf(&self, doc: usize) -> &[(usize, f64)] {
        &self.tf[doc]
    }

    /// Ids of input documents that had no retained token.
    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Tokenizes every document, builds the vocabulary and the tf table.
pub fn build_corpus<I>(docs: I, options: TokenizeOptions) -> Result<Corpus>
where
    I: IntoIterator<Item = RawDocument>,
{
    let tokenizer = Tokenizer::new(options);
    let mut vocabulary = Vocabulary::default();
    let mut documents = Vec::new();
    let mut tf = Vec::new();
    let mut dropped = Vec::new();

    for raw in docs {
        let tokens = tokenizer.tokenize(&raw.text);
        if tokens.is_empty() {
            dropped.push(raw.id);
            continue;
        }
        let ids: Vec<usize> = tokens.iter().map(|t| vocabulary.intern(t)).collect();
        let hist = Histogram::from_tokens(&ids)?;
        for &id in hist.counts().keys() {
            vocabulary.doc_freq[id] += 1;
        }
        tf.push(hist.normalized());
        documents.push(Document { id: raw.id, label: raw.label, tokens: ids });
    }

    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Corpus { documents, vocabulary, tf, dropped })
}

/// Reads the `doc_id<TAB>label<TAB>text` format.
///
/// Blank lines and lines starting with `#` are ignored; a label of `-`
/// means unlabeled.
pub fn read_tsv<R: BufRead>(reader: R) -> Result<Vec<RawDocument>> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (Some(id), Some(label), Some(text)) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::Parse {
                line: i + 1,
                msg: "expected doc_id<TAB>label<TAB>text".into(),
            });
        };
        let label = (label != "-").then_some(label);
        docs.push(RawDocument::new(id, label, text));
    }
    Ok(docs)
}

/// Writes documents in the format read by [`read_tsv`].
pub fn write_tsv<W: std::io::Write>(mut out: W, docs: &[RawDocument]) -> std::io::Result<()> {
    for d in docs {
        writeln!(out, "{}\t{}\t{}", d.id, d.label.as_deref().unwrap_or("-"), d.text)?;
    }
    Ok(())
}
