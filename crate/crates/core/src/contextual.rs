//! Contextual word distributions estimated from term frequencies.
//!
//! For each word `w`,
//! `q_w(u) = Σ_d tf(u,d)·tf(w,d) / Σ_d tf(w,d)`,
//! the distribution of words sharing documents with `w`, weighted by how
//! prominent `w` is in each document. No smoothing is applied.

use std::collections::BTreeMap;

use crate::corpus::{Corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;

#[derive(Debug, Clone)]
pub struct ContextualModel {
    rows: Vec<Vec<(usize, f64)>>,
    vocab: Vocabulary,
}

/// A word given either by its token or its id.
#[derive(Debug, Clone, Copy)]
pub enum WordRef<'a> {
    Id(usize),
    Token(&'a str),
}

impl From<usize> for WordRef<'_> {
    fn from(id: usize) -> Self {
        WordRef::Id(id)
    }
}

impl<'a> From<&'a str> for WordRef<'a> {
    fn from(token: &'a str) -> Self {
        WordRef::Token(token)
    }
}

impl ContextualModel {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sparse row `q_w` sorted by word id.
    pub fn sparse_row(&self, id: usize) -> &[(usize, f64)] {
        &self.rows[id]
    }

    pub fn resolve<'a>(&self, word: impl Into<WordRef<'a>>) -> Result<usize> {
        match word.into() {
            WordRef::Id(id) if id < self.rows.len() => Ok(id),
            WordRef::Id(id) => Err(Error::UnknownWord(format!("#{id}"))),
            WordRef::Token(t) => self.vocab.id(t).ok_or_else(|| Error::UnknownWord(t.to_owned())),
        }
    }

    /// Dense contextual distribution of a word.
    pub fn row<'a>(&self, word: impl Into<WordRef<'a>>) -> Result<SimplexPoint> {
        let id = self.resolve(word)?;
        let mut coords = vec![0.0; self.rows.len()];
        for &(u, p) in &self.rows[id] {
            coords[u] = p;
        }
        SimplexPoint::new(coords)
    }
}

pub fn estimate_contextual(corpus: &Corpus) -> Result<ContextualModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let m = corpus.vocabulary().len();
    let mut acc: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); m];
    let mut denom = vec![0.0; m];

    for d in 0..corpus.len() {
        let tf = corpus.tf(d);
        for &(w, tw) in tf {
            denom[w] += tw;
            let row = &mut acc[w];
            for &(u, tu) in tf {
                *row.entry(u).or_insert(0.0) += tu * tw;
            }
        }
    }

    let rows = acc
        .into_iter()
        .zip(&denom)
        .enumerate()
        .map(|(w, (row, &den))| {
            if den <= 0.0 {
                let term = corpus.vocabulary().term(w).unwrap_or("?");
                return Err(Error::UnknownWord(format!("{term} never occurs")));
            }
            Ok(row.into_iter().map(|(u, v)| (u, v / den)).collect())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ContextualModel { rows, vocab: corpus.vocabulary().clone() })
}
