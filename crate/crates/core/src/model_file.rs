//! Binary model file.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic      8 bytes   "SEMDIST1"
//! version    u32       1
//! vocab      u64 count, then per term: u32 byte length, UTF-8 bytes, u64 document frequency
//! excluded   u64 count, then u64 word ids (ascending)
//! t          f64
//! sigma      f64
//! T          u64 rows, u64 cols, rows·cols f64 row-major
//! G          u64 rows, u64 cols, rows·cols f64 row-major
//! ```
//!
//! `T` and `G` are the dense blocks over the non-excluded words in ascending
//! id order; rows and columns of excluded words are the identity and are not
//! stored.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::corpus::Vocabulary;
use crate::diffusion::TranslationModel;
use crate::error::{Error, Result};
use crate::expected::{precompute_gram, GramModel};

pub const MAGIC: &[u8; 8] = b"SEMDIST1";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub vocabulary: Vocabulary,
    pub translation: TranslationModel,
    pub gram: GramModel,
}

impl ModelFile {
    /// Bundles a translation model with its precomputed `T Tᵀ`.
    pub fn new(vocabulary: Vocabulary, translation: TranslationModel) -> Result<Self> {
        if vocabulary.len() != translation.vocab_size() {
            return Err(Error::DimensionMismatch {
                expected: vocabulary.len(),
                found: translation.vocab_size(),
            });
        }
        let gram = precompute_gram(&translation);
        Ok(Self { vocabulary, translation, gram })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.vocabulary.len() as u64).to_le_bytes());
        for (term, &df) in self.vocabulary.terms().iter().zip(self.vocabulary.doc_freq()) {
            out.extend_from_slice(&(term.len() as u32).to_le_bytes());
            out.extend_from_slice(term.as_bytes());
            out.extend_from_slice(&(df as u64).to_le_bytes());
        }
        let excluded = self.translation.excluded();
        out.extend_from_slice(&(excluded.len() as u64).to_le_bytes());
        for &id in excluded {
            out.extend_from_slice(&(id as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.translation.t().to_le_bytes());
        out.extend_from_slice(&self.translation.sigma().to_le_bytes());
        write_matrix(&mut out, self.translation.block());
        write_matrix(&mut out, self.gram.block());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8).map_err(|_| Error::BadMagic)? != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let m = r.len(12)?;
        let mut terms = Vec::with_capacity(m);
        let mut doc_freq = Vec::with_capacity(m);
        for _ in 0..m {
            let n = r.u32()? as usize;
            let s = std::str::from_utf8(r.take(n)?)
                .map_err(|_| Error::MalformedModel("vocabulary entry is not UTF-8".into()))?;
            terms.push(s.to_owned());
            doc_freq.push(r.u64()? as usize);
        }
        let vocabulary = Vocabulary::from_parts(terms, doc_freq)
            .map_err(|e| Error::MalformedModel(e.to_string()))?;
        let n_excl = r.len(8)?;
        let mut excluded = BTreeSet::new();
        for _ in 0..n_excl {
            excluded.insert(r.u64()? as usize);
        }
        let t = r.f64()?;
        let sigma = r.f64()?;
        let t_block = r.matrix()?;
        let g_block = r.matrix()?;
        if r.pos != bytes.len() {
            return Err(Error::MalformedModel("trailing bytes".into()));
        }
        let translation = TranslationModel::from_parts(m, excluded.clone(), t_block, t, sigma)
            .map_err(|e| Error::MalformedModel(e.to_string()))?;
        let gram = GramModel::from_parts(m, excluded, g_block)
            .map_err(|e| Error::MalformedModel(e.to_string()))?;
        Ok(Self { vocabulary, translation, gram })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn write_matrix(out: &mut Vec<u8>, m: &DMatrix<f64>) {
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for row in m.row_iter() {
        for v in row.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::MalformedModel("unexpected end of file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A count whose items need at least `min_item` bytes each.
    fn len(&mut self, min_item: usize) -> Result<usize> {
        let n = self.u64()?;
        let remaining = (self.bytes.len() - self.pos) as u64;
        if n.saturating_mul(min_item as u64) > remaining {
            return Err(Error::MalformedModel(format!("count {n} exceeds file size")));
        }
        Ok(n as usize)
    }

    fn matrix(&mut self) -> Result<DMatrix<f64>> {
        let rows = self.u64()? as usize;
        let cols = self.u64()? as usize;
        let n = rows
            .checked_mul(cols)
            .filter(|n| n.saturating_mul(8) <= self.bytes.len() - self.pos)
            .ok_or_else(|| Error::MalformedModel("matrix larger than file".into()))?;
        let data = self.take(n * 8)?;
        let values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        Ok(DMatrix::from_row_iterator(rows, cols, values))
    }
}
