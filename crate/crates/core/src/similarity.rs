//! Category/document similarity measures and top-k classification.
//!
//! All three sparse measures share one shape:
//!
//! ```text
//! sim(c, d) = sum_j sum_k f(w_j, w_k) * mu(w_j) * d(w_k) / (|mu| * |d|)
//! ```
//!
//! With `f` the identity indicator this is plain cosine ([`sim_dirac`]).
//! Replacing it by the thresholded embedding cosine [`phi`] lets synonyms
//! contribute ([`sim_word`]). [`sim_category_word`] additionally appends
//! the category vector and the document vector as one pseudo word each,
//! weighted by `alpha`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catvec::{document_vector_algebraic, CategoryVectors};
use crate::centroid::{rank, CentroidModel};
use crate::corpus::Document;
use crate::dense::{self, DenseVector};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::sparse::{SparseVector, TermId};
use crate::taxonomy::CategoryId;
use crate::tfidf::{TfIdfModel, Vocabulary};

pub const DEFAULT_THETA: f64 = 0.6;
pub const DEFAULT_ALPHA: f64 = 0.9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    /// Cosine of tf-idf vectors.
    #[default]
    #[serde(rename = "dirac")]
    DiracCos,
    /// Cosine softened by word-vector similarity.
    #[serde(rename = "word")]
    WordLevel,
    /// `WordLevel` plus category and document vectors as pseudo words.
    #[serde(rename = "catword")]
    CategoryWordLevel,
    /// Cosine of the composed category and document vectors alone.
    #[serde(rename = "densecos")]
    DenseCos,
}

impl Measure {
    pub const ALL: [Measure; 4] = [
        Measure::DiracCos,
        Measure::WordLevel,
        Measure::CategoryWordLevel,
        Measure::DenseCos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::DiracCos => "dirac",
            Measure::WordLevel => "word",
            Measure::CategoryWordLevel => "catword",
            Measure::DenseCos => "densecos",
        }
    }

    pub fn needs_embeddings(self) -> bool {
        self != Measure::DiracCos
    }

    pub fn needs_category_vectors(self) -> bool {
        matches!(self, Measure::CategoryWordLevel | Measure::DenseCos)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown measure `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityConfig {
    pub measure: Measure,
    /// Word pairs count only when their cosine is strictly above this.
    pub theta: f64,
    /// Weight of the pseudo words.
    pub alpha: f64,
    pub include_pseudo_in_norm: bool,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            measure: Measure::DiracCos,
            theta: DEFAULT_THETA,
            alpha: DEFAULT_ALPHA,
            include_pseudo_in_norm: true,
        }
    }
}

impl SimilarityConfig {
    pub fn new(measure: Measure) -> Self {
        SimilarityConfig {
            measure,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!("theta {} outside [0, 1]", self.theta)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self.measure {
            Measure::DiracCos | Measure::DenseCos => self.measure.name().to_string(),
            Measure::WordLevel => format!("word(theta={})", self.theta),
            Measure::CategoryWordLevel => {
                format!("catword(theta={}, alpha={})", self.theta, self.alpha)
            }
        }
    }
}

/// Gate of the word similarity: the cosine when it clears `theta`, else 0.
pub fn gate(cos: f64, theta: f64) -> f64 {
    if cos > theta {
        cos
    } else {
        0.0
    }
}

/// Word similarity between two store keys. Identical keys score 1 even
/// without vectors; otherwise a missing vector scores 0.
pub fn phi(store: &EmbeddingStore, wj: &str, wk: &str, theta: f64) -> f64 {
    if wj == wk {
        return 1.0;
    }
    match (store.get(wj), store.get(wk)) {
        (Some(a), Some(b)) => gate(dense::cosine(a, b), theta),
        _ => 0.0,
    }
}

/// Word vectors looked up by term id, with norms cached.
#[derive(Clone, Debug)]
pub struct TermSpace {
    dim: usize,
    vectors: Vec<Option<(Vec<f64>, f64)>>,
}

impl TermSpace {
    pub fn new(vocab: &Vocabulary, store: &EmbeddingStore) -> Self {
        let vectors = vocab
            .terms()
            .iter()
            .map(|t| store.get(t).map(|v| (v.to_vec(), dense::norm(v))))
            .collect();
        TermSpace {
            dim: store.dim(),
            vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, term: TermId) -> Option<&[f64]> {
        self.vectors[term as usize].as_ref().map(|(v, _)| v.as_slice())
    }

    /// Same arithmetic as [`dense::cosine`].
    pub fn cosine(&self, j: TermId, k: TermId) -> Option<f64> {
        let (a, na) = self.vectors[j as usize].as_ref()?;
        let (b, nb) = self.vectors[k as usize].as_ref()?;
        let denom = na * nb;
        Some(if denom == 0.0 { 0.0 } else { dense::dot(a, b) / denom })
    }

    pub fn phi(&self, j: TermId, k: TermId, theta: f64) -> f64 {
        if j == k {
            return 1.0;
        }
        self.cosine(j, k).map_or(0.0, |c| gate(c, theta))
    }

    /// Gated cosine between a term and a unit-norm pseudo vector.
    fn phi_pseudo(&self, term: TermId, unit: &[f64], theta: f64) -> f64 {
        match &self.vectors[term as usize] {
            Some((v, n)) if *n > 0.0 => gate(dense::dot(v, unit) / n, theta),
            _ => 0.0,
        }
    }
}

/// Per-term lists of terms whose [`TermSpace::phi`] is nonzero, each term
/// listing itself. Scores computed through it equal the naive double loop
/// bit for bit.
#[derive(Clone, Debug)]
pub struct NeighborIndex {
    theta: f64,
    lists: Vec<Vec<(TermId, f64)>>,
}

impl NeighborIndex {
    pub fn build(space: &TermSpace, theta: f64) -> Self {
        let n = space.vectors.len() as TermId;
        let lists = (0..n)
            .map(|j| {
                (0..n)
                    .filter_map(|k| {
                        let p = space.phi(j, k, theta);
                        (p != 0.0).then_some((k, p))
                    })
                    .collect()
            })
            .collect();
        NeighborIndex { theta, lists }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn neighbors(&self, term: TermId) -> &[(TermId, f64)] {
        &self.lists[term as usize]
    }
}

/// Plain cosine written as the identity-indicator double sum.
pub fn sim_dirac(centroid: &SparseVector, doc: &SparseVector) -> f64 {
    let denom = centroid.l2_norm() * doc.l2_norm();
    if denom == 0.0 {
        return 0.0;
    }
    let mut num = 0.0;
    for (j, mu) in centroid.iter() {
        for (k, d) in doc.iter() {
            if j == k {
                num += mu * d;
            }
        }
    }
    num / denom
}

fn word_numerator(centroid: &SparseVector, doc: &SparseVector, space: &TermSpace, theta: f64) -> f64 {
    let mut num = 0.0;
    for (j, mu) in centroid.iter() {
        for (k, d) in doc.iter() {
            num += space.phi(j, k, theta) * mu * d;
        }
    }
    num
}

// Same summation order as `word_numerator`, skipping exact zeros.
fn word_numerator_indexed(centroid: &SparseVector, doc: &SparseVector, index: &NeighborIndex) -> f64 {
    let mut num = 0.0;
    let de = doc.entries();
    for (j, mu) in centroid.iter() {
        let nb = index.neighbors(j);
        let (mut a, mut b) = (0, 0);
        while a < nb.len() && b < de.len() {
            match nb[a].0.cmp(&de[b].0) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    num += nb[a].1 * mu * de[b].1;
                    a += 1;
                    b += 1;
                }
            }
        }
    }
    num
}

/// Cosine with the identity indicator replaced by [`phi`].
pub fn sim_word(centroid: &SparseVector, doc: &SparseVector, space: &TermSpace, theta: f64) -> f64 {
    let denom = centroid.l2_norm() * doc.l2_norm();
    if denom == 0.0 {
        return 0.0;
    }
    word_numerator(centroid, doc, space, theta) / denom
}

/// [`sim_word`] evaluated through a neighbor index built for the same theta.
pub fn sim_word_indexed(centroid: &SparseVector, doc: &SparseVector, index: &NeighborIndex) -> f64 {
    let denom = centroid.l2_norm() * doc.l2_norm();
    if denom == 0.0 {
        return 0.0;
    }
    word_numerator_indexed(centroid, doc, index) / denom
}

/// One side of the pseudo-word augmented comparison: real term weights
/// scaled to unit norm, plus an optional unit pseudo vector of weight alpha.
#[derive(Clone, Debug)]
pub struct PseudoAugmented<'a> {
    pub terms: &'a SparseVector,
    pub pseudo: Option<DenseVector>,
}

impl<'a> PseudoAugmented<'a> {
    /// A zero or absent dense vector contributes no pseudo entry.
    pub fn new(terms: &'a SparseVector, dense: Option<&DenseVector>) -> Self {
        PseudoAugmented {
            terms,
            pseudo: dense.and_then(DenseVector::unit),
        }
    }
}

/// Word-level similarity with one pseudo word appended to each side.
///
/// Both sides' real term weights are first scaled to unit norm so that
/// `alpha` is measured against a fixed mass; this keeps the measure
/// invariant to rescaling either input. The real-real block equals
/// [`sim_word`]; the three pseudo blocks add
///
/// ```text
/// alpha * sum_j mu(w_j) phi(w_j, D)  +  alpha * sum_k d(w_k) phi(C, w_k)  +  alpha^2 phi(C, D)
/// ```
///
/// where `C` and `D` are the unit category and document vectors. When
/// `include_pseudo_in_norm` is set, each side's norm becomes
/// `sqrt(1 + alpha^2)` (or `alpha` for an empty real side).
pub fn sim_category_word(
    category: &PseudoAugmented<'_>,
    doc: &PseudoAugmented<'_>,
    space: &TermSpace,
    cfg: &SimilarityConfig,
) -> f64 {
    sim_category_word_with(category, doc, space, None, cfg)
}

fn sim_category_word_with(
    category: &PseudoAugmented<'_>,
    doc: &PseudoAugmented<'_>,
    space: &TermSpace,
    index: Option<&NeighborIndex>,
    cfg: &SimilarityConfig,
) -> f64 {
    let (theta, alpha) = (cfg.theta, cfg.alpha);
    let (nm, nd) = (category.terms.l2_norm(), doc.terms.l2_norm());
    let (real_c, real_d) = (nm > 0.0, nd > 0.0);

    let mut num = 0.0;
    if real_c && real_d {
        num += match index {
            Some(ix) => word_numerator_indexed(category.terms, doc.terms, ix),
            None => word_numerator(category.terms, doc.terms, space, theta),
        } / (nm * nd);
    }
    if alpha > 0.0 {
        if let (Some(pd), true) = (&doc.pseudo, real_c) {
            let s: f64 = category
                .terms
                .iter()
                .map(|(j, mu)| space.phi_pseudo(j, pd.as_slice(), theta) * mu / nm)
                .sum();
            num += alpha * s;
        }
        if let (Some(pc), true) = (&category.pseudo, real_d) {
            let s: f64 = doc
                .terms
                .iter()
                .map(|(k, d)| space.phi_pseudo(k, pc.as_slice(), theta) * d / nd)
                .sum();
            num += alpha * s;
        }
        if let (Some(pc), Some(pd)) = (&category.pseudo, &doc.pseudo) {
            num += alpha * alpha * gate(dense::dot(pc.as_slice(), pd.as_slice()), theta);
        }
    }

    let side = |real: bool, pseudo: bool| {
        let r = if real { 1.0 } else { 0.0 };
        if cfg.include_pseudo_in_norm && pseudo {
            (r + alpha * alpha).sqrt()
        } else {
            r
        }
    };
    let denom = side(real_c, category.pseudo.is_some()) * side(real_d, doc.pseudo.is_some());
    if denom == 0.0 {
        0.0
    } else {
        num / denom
    }
}

/// Scores categories of a centroid model against documents under one
/// measure.
pub struct Classifier<'a> {
    centroids: &'a CentroidModel,
    tfidf: &'a TfIdfModel,
    store: Option<&'a EmbeddingStore>,
    space: Option<TermSpace>,
    index: Option<NeighborIndex>,
    catvecs: BTreeMap<CategoryId, Option<DenseVector>>,
    config: SimilarityConfig,
}

impl<'a> Classifier<'a> {
    pub fn new(
        centroids: &'a CentroidModel,
        tfidf: &'a TfIdfModel,
        store: Option<&'a EmbeddingStore>,
        catvecs: Option<&CategoryVectors>,
        config: SimilarityConfig,
    ) -> Result<Self> {
        config.validate()?;
        let measure = config.measure;
        if measure.needs_embeddings() && store.is_none() {
            return Err(Error::Config(format!("measure `{measure}` needs word embeddings")));
        }
        let mut unit_catvecs = BTreeMap::new();
        if measure.needs_category_vectors() {
            let cv = catvecs
                .filter(|c| !c.is_empty())
                .ok_or_else(|| Error::Config(format!("measure `{measure}` needs category vectors")))?;
            let store_dim = store.expect("checked above").dim();
            if let Some(d) = cv.dim()? {
                if d != store_dim {
                    return Err(Error::Config(format!(
                        "category vectors have dimension {d}, embeddings have {store_dim}"
                    )));
                }
            }
            for (id, v) in cv.iter() {
                unit_catvecs.insert(id, v.unit());
            }
        }
        Ok(Classifier {
            centroids,
            tfidf,
            store,
            space: store.map(|s| TermSpace::new(tfidf.vocab(), s)),
            index: None,
            catvecs: unit_catvecs,
            config,
        })
    }

    /// Precomputes above-threshold neighbor lists so word-level scoring
    /// skips pairs that cannot contribute. Scores are unchanged.
    pub fn with_neighbor_index(mut self) -> Self {
        if let Some(space) = &self.space {
            self.index = Some(NeighborIndex::build(space, self.config.theta));
        }
        self
    }

    pub fn config(&self) -> &SimilarityConfig {
        &self.config
    }

    pub fn classify(&self, doc: &Document, k: usize) -> Vec<(CategoryId, f64)> {
        self.classify_tokens(&doc.tokens, k)
    }

    pub fn classify_tokens<S: AsRef<str>>(&self, tokens: &[S], k: usize) -> Vec<(CategoryId, f64)> {
        let v = self.tfidf.transform_tokens(tokens);
        self.classify_vector(&v, k)
    }

    /// Ranks categories for a tf-idf document vector.
    pub fn classify_vector(&self, doc: &SparseVector, k: usize) -> Vec<(CategoryId, f64)> {
        let docvec = match (self.config.measure.needs_category_vectors(), self.store) {
            (true, Some(store)) => {
                let c = document_vector_algebraic(doc, self.tfidf.vocab(), store);
                (!c.zero).then_some(c.vector)
            }
            _ => None,
        };
        self.classify_with_dense(doc, docvec.as_ref(), k)
    }

    /// Ranks categories given both document representations. `docvec` is
    /// only read by the measures that use category vectors.
    pub fn classify_with_dense(
        &self,
        doc: &SparseVector,
        docvec: Option<&DenseVector>,
        k: usize,
    ) -> Vec<(CategoryId, f64)> {
        let docvec = docvec.filter(|v| !v.is_zero());
        let scores: Vec<(CategoryId, f64)> = match self.config.measure {
            Measure::DiracCos | Measure::WordLevel => {
                if doc.is_empty() {
                    return Vec::new();
                }
                self.centroids
                    .active()
                    .map(|id| (id, self.score_sparse(self.centroids.centroid(id), doc)))
                    .collect()
            }
            Measure::CategoryWordLevel => {
                if doc.is_empty() && docvec.is_none() {
                    return Vec::new();
                }
                let space = self.space.as_ref().expect("validated");
                let d = PseudoAugmented::new(doc, docvec);
                self.centroids
                    .active()
                    .map(|id| {
                        let c = PseudoAugmented {
                            terms: self.centroids.centroid(id),
                            pseudo: self.catvecs.get(&id).cloned().flatten(),
                        };
                        (id, sim_category_word_with(&c, &d, space, self.index.as_ref(), &self.config))
                    })
                    .collect()
            }
            Measure::DenseCos => {
                let Some(dv) = docvec else { return Vec::new() };
                self.catvecs
                    .iter()
                    .filter_map(|(id, unit)| unit.as_ref().map(|u| (*id, u.cosine(dv))))
                    .collect()
            }
        };
        rank(scores, |id| self.centroids.path(id), k)
    }

    fn score_sparse(&self, centroid: &SparseVector, doc: &SparseVector) -> f64 {
        match (self.config.measure, &self.index, &self.space) {
            (Measure::DiracCos, _, _) => sim_dirac(centroid, doc),
            (_, Some(index), _) => sim_word_indexed(centroid, doc, index),
            (_, None, Some(space)) => sim_word(centroid, doc, space, self.config.theta),
            (_, None, None) => unreachable!("validated at construction"),
        }
    }
}

/// One-shot classification of a single document.
pub fn classify(
    centroids: &CentroidModel,
    tfidf: &TfIdfModel,
    catvecs: Option<&CategoryVectors>,
    store: Option<&EmbeddingStore>,
    doc: &Document,
    cfg: &SimilarityConfig,
    k: usize,
) -> Result<Vec<(CategoryId, f64)>> {
    Ok(Classifier::new(centroids, tfidf, store, catvecs, cfg.clone())?.classify(doc, k))
}
