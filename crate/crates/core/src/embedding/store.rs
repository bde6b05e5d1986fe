use std::collections::HashMap;

use crate::dense;
use crate::error::{Error, Result};

/// Keys of category vectors carry this prefix so they can share a store
/// with word vectors.
pub const CATEGORY_PREFIX: &str = "cat:";

pub fn category_key(path: &str) -> String {
    format!("{CATEGORY_PREFIX}{path}")
}

pub fn is_category_key(key: &str) -> bool {
    key.starts_with(CATEGORY_PREFIX)
}

/// Dense vectors keyed by word or `cat:`-prefixed category path.
///
/// Input vectors are what callers look up. Output (context) vectors are
/// only present on stores fresh out of training.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    keys: Vec<String>,
    index: HashMap<String, usize>,
    input: Vec<f64>,
    output: Option<Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "embedding dimension must be positive");
        EmbeddingStore {
            dim,
            keys: Vec::new(),
            index: HashMap::new(),
            input: Vec::new(),
            output: None,
        }
    }

    pub(crate) fn from_parts(
        dim: usize,
        keys: Vec<String>,
        input: Vec<f64>,
        output: Option<Vec<f64>>,
    ) -> Self {
        assert_eq!(input.len(), keys.len() * dim);
        if let Some(o) = &output {
            assert_eq!(o.len(), keys.len() * dim);
        }
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        EmbeddingStore {
            dim,
            keys,
            index,
            input,
            output,
        }
    }

    /// Adds or replaces the input vector for `key`.
    pub fn insert(&mut self, key: impl Into<String>, vector: &[f64]) -> Result<()> {
        let key = key.into();
        if vector.len() != self.dim {
            return Err(Error::Config(format!(
                "vector for `{key}` has {} components, store has {}",
                vector.len(),
                self.dim
            )));
        }
        if !vector.iter().all(|x| x.is_finite()) {
            return Err(Error::Config(format!("vector for `{key}` is not finite")));
        }
        match self.index.get(&key) {
            Some(&row) => self.input[row * self.dim..(row + 1) * self.dim].copy_from_slice(vector),
            None => {
                self.index.insert(key.clone(), self.keys.len());
                self.keys.push(key);
                self.input.extend_from_slice(vector);
                if let Some(o) = &mut self.output {
                    o.extend(std::iter::repeat_n(0.0, self.dim));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    pub fn row(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn vector(&self, row: usize) -> &[f64] {
        &self.input[row * self.dim..(row + 1) * self.dim]
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.row(key).map(|r| self.vector(r))
    }

    pub fn get_output(&self, key: &str) -> Option<&[f64]> {
        let out = self.output.as_ref()?;
        self.row(key).map(|r| &out[r * self.dim..(r + 1) * self.dim])
    }

    pub fn has_output(&self) -> bool {
        self.output.is_some()
    }

    /// Forgets the output matrix.
    pub fn without_output(mut self) -> Self {
        self.output = None;
        self
    }

    /// Iterates `(key, vector)` over word entries only.
    pub fn words(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.iter().filter(|(k, _)| !is_category_key(k))
    }

    pub fn categories(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.iter().filter(|(k, _)| is_category_key(k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.keys
            .iter()
            .enumerate()
            .map(move |(i, k)| (k.as_str(), self.vector(i)))
    }
}

/// Cosine between the input vectors of two stored words.
pub fn word_cosine(store: &EmbeddingStore, w1: &str, w2: &str) -> Result<f64> {
    let a = store.get(w1).ok_or_else(|| Error::MissingKey(w1.to_string()))?;
    let b = store.get(w2).ok_or_else(|| Error::MissingKey(w2.to_string()))?;
    Ok(dense::cosine(a, b))
}
