//! Taxonomy-scale text classification that joins explicit tf-idf category
//! centroids with implicit word and category embeddings.
//!
//! The pipeline, bottom-up:
//!
//! - [`taxonomy`] and [`corpus`] load the category tree and labeled documents.
//! - [`tfidf`] builds the vocabulary and sparse tf-idf vectors ([`sparse`]).
//! - [`centroid`] averages document vectors per category and merges
//!   descendants into their ancestors.
//! - [`embedding`] stores and trains word vectors (skip-gram with negative
//!   sampling); [`category_embedding`] trains category vectors jointly with
//!   words, and [`catvec`] composes them algebraically from centroids.
//! - [`similarity`] scores categories against documents with plain cosine,
//!   embedding-softened cosine, and the variant that adds category and
//!   document vectors as pseudo words.
//! - [`eval`] computes macro-averaged precision/recall/F1 and precision@k.

pub mod category_embedding;
pub mod catvec;
pub mod centroid;
pub mod corpus;
pub mod dense;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod similarity;
pub mod sparse;
pub mod taxonomy;
pub mod tfidf;

pub use centroid::CentroidModel;
pub use corpus::{Document, Tokenizer, TokenizerConfig};
pub use dense::DenseVector;
pub use embedding::{EmbeddingStore, TrainConfig};
pub use error::{Error, Result};
pub use similarity::{Measure, SimilarityConfig};
pub use sparse::SparseVector;
pub use taxonomy::{CategoryId, Taxonomy};
pub use tfidf::{TfIdfConfig, TfIdfModel, Vocabulary};
