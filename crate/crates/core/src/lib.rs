//! Unsupervised document metrics from word co-occurrence.
//!
//! Words are embedded as contextual distributions on the simplex, linked by a
//! Fisher-distance heat graph, and diffused with the heat kernel of its
//! normalized Laplacian. The row-normalized kernel is a word translation
//! model; documents are compared through the expected distance or kernel
//! between their randomly translated versions.

pub mod config;
pub mod contextual;
pub mod corpus;
pub mod diffusion;
pub mod error;
pub mod eval;
pub mod expected;
pub mod geometry;
pub mod learn;
pub mod model_file;
pub mod synth;

pub use contextual::{estimate_contextual, ContextualModel, WordRef};
pub use corpus::{build_corpus, histogram, tokenize, Corpus, Document, Histogram, RawDocument, Vocabulary};
pub use diffusion::{fit_translation, heat_kernel, make_translation, normalized_laplacian, DiffusionParams, TranslationModel};
pub use error::{Error, Result};
pub use expected::{
    expected_linear_kernel, expected_rbf_kernel, expected_sq_l2, precompute_gram, GramModel, KernelKind,
};
pub use geometry::{fisher_distance, kl_divergence, Divergence, SimplexPoint};
pub use model_file::ModelFile;
