//! Category and document vectors composed from word vectors.
//!
//! A category vector is the term-weighted sum of the word vectors of its
//! centroid terms; document vectors are built the same way from tf-idf
//! document vectors. Terms without a word vector are skipped and their
//! weight reported, without renormalizing the rest.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::centroid::{rank, CentroidModel};
use crate::dense::{self, DenseVector};
use crate::embedding::{category_key, is_category_key, EmbeddingStore};
use crate::error::{Error, Result};
use crate::sparse::SparseVector;
use crate::taxonomy::CategoryId;
use crate::tfidf::Vocabulary;

#[derive(Clone, Debug, PartialEq)]
pub struct ComposedVector {
    pub vector: DenseVector,
    /// Total weight of terms that had no word vector.
    pub skipped_mass: f64,
    /// No term contributed; `vector` is all zeros.
    pub zero: bool,
}

/// `sum(weight(w) * vec(w))` over the terms of `weights` found in `store`.
pub fn compose(weights: &SparseVector, vocab: &Vocabulary, store: &EmbeddingStore) -> ComposedVector {
    let mut vector = DenseVector::zeros(store.dim());
    let mut skipped_mass = 0.0;
    let mut used = 0;
    for (term, w) in weights.iter() {
        match store.get(vocab.term(term)) {
            Some(v) => {
                vector.add_scaled(v, w);
                used += 1;
            }
            None => skipped_mass += w,
        }
    }
    ComposedVector {
        vector,
        skipped_mass,
        zero: used == 0,
    }
}

pub fn category_vector_algebraic(
    centroid: &SparseVector,
    vocab: &Vocabulary,
    store: &EmbeddingStore,
) -> ComposedVector {
    let c = compose(centroid, vocab, store);
    if c.zero {
        log::warn!("category vector has no in-store terms; returning zeros");
    }
    c
}

pub fn document_vector_algebraic(
    doc_vec: &SparseVector,
    vocab: &Vocabulary,
    store: &EmbeddingStore,
) -> ComposedVector {
    compose(doc_vec, vocab, store)
}

/// Algebraic vectors for every category with a nonempty centroid.
#[derive(Clone, Debug, Default)]
pub struct CategoryVectors {
    vectors: BTreeMap<CategoryId, DenseVector>,
    report: Vec<CategoryVectorReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryVectorReport {
    pub path: String,
    pub skipped_mass: f64,
    pub zero: bool,
}

impl CategoryVectors {
    pub fn generate(model: &CentroidModel, vocab: &Vocabulary, store: &EmbeddingStore) -> Self {
        let mut out = CategoryVectors::default();
        for id in model.active() {
            let c = category_vector_algebraic(model.centroid(id), vocab, store);
            out.report.push(CategoryVectorReport {
                path: model.path(id).to_string(),
                skipped_mass: c.skipped_mass,
                zero: c.zero,
            });
            out.vectors.insert(id, c.vector);
        }
        out
    }

    /// Reads `cat:`-prefixed vectors for the categories of `model`.
    pub fn from_store(model: &CentroidModel, store: &EmbeddingStore) -> Self {
        let mut out = CategoryVectors::default();
        for i in 0..model.len() {
            let id = CategoryId(i as u32);
            if let Some(v) = store.get(&category_key(model.path(id))) {
                out.vectors.insert(id, DenseVector::from(v.to_vec()));
            }
        }
        out
    }

    pub fn insert(&mut self, id: CategoryId, v: DenseVector) {
        self.vectors.insert(id, v);
    }

    pub fn get(&self, id: CategoryId) -> Option<&DenseVector> {
        self.vectors.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (CategoryId, &DenseVector)> {
        self.vectors.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn report(&self) -> &[CategoryVectorReport] {
        &self.report
    }

    /// Common dimension, or an error when vectors disagree.
    pub fn dim(&self) -> Result<Option<usize>> {
        let mut dims = self.vectors.values().map(DenseVector::dim);
        let Some(first) = dims.next() else { return Ok(None) };
        if dims.any(|d| d != first) {
            return Err(Error::Config("category vectors have mixed dimensions".into()));
        }
        Ok(Some(first))
    }

    /// Adds every vector to `store` under its `cat:` key.
    pub fn append_to(&self, store: &mut EmbeddingStore, model: &CentroidModel) -> Result<()> {
        for (id, v) in &self.vectors {
            store.insert(category_key(model.path(*id)), v.as_slice())?;
        }
        Ok(())
    }
}

/// Top-`n` words by cosine to `vec`; category keys are skipped. A zero
/// vector has no neighbors.
pub fn nearest_words(store: &EmbeddingStore, vec: &DenseVector, n: usize) -> Vec<(String, f64)> {
    if vec.is_zero() {
        return Vec::new();
    }
    let words: Vec<(&str, f64)> = store
        .iter()
        .filter(|(k, _)| !is_category_key(k))
        .map(|(k, v)| (k, dense::cosine(v, vec.as_slice())))
        .collect();
    // reuse the ranking helper: ids index `words`
    let scores = (0..words.len()).map(|i| (CategoryId(i as u32), words[i].1)).collect();
    rank(scores, |id| words[id.index()].0, n)
        .into_iter()
        .map(|(id, s)| (words[id.index()].0.to_string(), s))
        .collect()
}
