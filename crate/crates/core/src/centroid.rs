//! Per-category tf-idf centroids with bottom-up descendant merging.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::sparse::{cosine, SparseVector, TermId};
use crate::taxonomy::{CategoryId, Taxonomy};
use crate::tfidf::{from_term_pairs, to_term_pairs, TfIdfModel, Vocabulary};

pub const DEFAULT_MERGE_LAMBDA: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct CentroidModel {
    paths: Vec<String>,
    centroids: Vec<SparseVector>,
    /// Decay applied by [`CentroidModel::merge_descendants`], if it ran.
    merge_lambda: Option<f64>,
}

impl CentroidModel {
    /// Assembles a model from explicit centroids, one per category id.
    pub fn from_centroids(taxonomy: &Taxonomy, centroids: Vec<SparseVector>) -> Result<Self> {
        if centroids.len() != taxonomy.len() {
            return Err(Error::Config(format!(
                "{} centroids for {} categories",
                centroids.len(),
                taxonomy.len()
            )));
        }
        Ok(CentroidModel {
            paths: taxonomy.categories().iter().map(|c| c.path.clone()).collect(),
            centroids,
            merge_lambda: None,
        })
    }

    /// Mean tf-idf vector of each category's own documents. Categories
    /// without documents get the empty vector. Unlabeled documents are
    /// ignored.
    pub fn build(taxonomy: &Taxonomy, docs: &[Document], tfidf: &TfIdfModel) -> Self {
        let vectors: Vec<SparseVector> = docs.iter().map(|d| tfidf.transform(d)).collect();
        let labels: Vec<Option<CategoryId>> = docs.iter().map(|d| d.label).collect();
        Self::build_from_vectors(taxonomy, &labels, &vectors)
    }

    pub fn build_from_vectors(
        taxonomy: &Taxonomy,
        labels: &[Option<CategoryId>],
        vectors: &[SparseVector],
    ) -> Self {
        let mut sums: Vec<BTreeMap<TermId, f64>> = vec![BTreeMap::new(); taxonomy.len()];
        let mut counts = vec![0usize; taxonomy.len()];
        for (label, v) in labels.iter().zip(vectors) {
            let Some(c) = label else { continue };
            counts[c.index()] += 1;
            let acc = &mut sums[c.index()];
            for (t, w) in v.iter() {
                *acc.entry(t).or_insert(0.0) += w;
            }
        }
        let centroids = sums
            .into_iter()
            .zip(&counts)
            .map(|(sum, &n)| {
                if n == 0 {
                    return SparseVector::new();
                }
                let inv = 1.0 / n as f64;
                SparseVector::from_entries(sum.into_iter().map(|(t, w)| (t, w * inv)))
                    .expect("averages of nonnegative weights")
            })
            .collect();
        CentroidModel {
            paths: taxonomy.categories().iter().map(|c| c.path.clone()).collect(),
            centroids,
            merge_lambda: None,
        }
    }

    /// Enriches every centroid with its descendants: the merged sum
    /// `M_i = mu_i + lambda * sum(M_c for c in children(i))` is accumulated
    /// bottom-up and each output centroid is `M_i / |M_i|`. A grandchild thus
    /// contributes with weight `lambda^2`.
    pub fn merge_descendants(&self, taxonomy: &Taxonomy, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Config(format!("merge lambda {lambda} outside [0, 1]")));
        }
        self.check_taxonomy(taxonomy)?;
        let mut merged: Vec<SparseVector> = self.centroids.clone();
        for id in taxonomy.post_order() {
            let mut m = self.centroids[id.index()].clone();
            for c in &taxonomy.category(id).children {
                m = m.add_scaled(&merged[c.index()], lambda);
            }
            merged[id.index()] = m;
        }
        Ok(CentroidModel {
            paths: self.paths.clone(),
            centroids: merged.iter().map(SparseVector::normalized).collect(),
            merge_lambda: Some(lambda),
        })
    }

    fn check_taxonomy(&self, taxonomy: &Taxonomy) -> Result<()> {
        let same = taxonomy.len() == self.paths.len()
            && taxonomy
                .categories()
                .iter()
                .zip(&self.paths)
                .all(|(c, p)| &c.path == p);
        if same {
            Ok(())
        } else {
            Err(Error::Config("centroid model was built for a different taxonomy".into()))
        }
    }

    pub fn merge_lambda(&self) -> Option<f64> {
        self.merge_lambda
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn centroid(&self, id: CategoryId) -> &SparseVector {
        &self.centroids[id.index()]
    }

    pub fn path(&self, id: CategoryId) -> &str {
        &self.paths[id.index()]
    }

    /// Ids of categories with a nonempty centroid.
    pub fn active(&self) -> impl Iterator<Item = CategoryId> + '_ {
        self.centroids
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, _)| CategoryId(i as u32))
    }

    /// Top-`k` categories by cosine to `doc_vec`. Empty centroids are never
    /// ranked and an empty document yields an empty ranking.
    pub fn classify_cosine(&self, doc_vec: &SparseVector, k: usize) -> Vec<(CategoryId, f64)> {
        if doc_vec.is_empty() {
            return Vec::new();
        }
        let scores = self.active().map(|id| (id, cosine(self.centroid(id), doc_vec))).collect();
        rank(scores, |id| self.path(id), k)
    }

    /// Best of `candidates` by cosine; `None` when no candidate scores above 0.
    pub fn best_among(&self, doc_vec: &SparseVector, candidates: &[CategoryId]) -> Option<CategoryId> {
        let scores = candidates
            .iter()
            .map(|&id| (id, cosine(self.centroid(id), doc_vec)))
            .filter(|(_, s)| *s > 0.0)
            .collect();
        rank(scores, |id| self.path(id), 1).first().map(|(id, _)| *id)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W, vocab: &Vocabulary) -> Result<()> {
        for (path, c) in self.paths.iter().zip(&self.centroids) {
            let rec = CentroidRecord {
                path: path.clone(),
                entries: to_term_pairs(c, vocab),
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n").map_err(|e| Error::io("<centroids>", e))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_jsonl(&mut w, vocab)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads centroids for `taxonomy`; categories absent from the file get
    /// the empty vector.
    pub fn read_jsonl<R: BufRead>(reader: R, taxonomy: &Taxonomy, vocab: &Vocabulary) -> Result<Self> {
        let mut centroids = vec![SparseVector::new(); taxonomy.len()];
        let mut seen = vec![false; taxonomy.len()];
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<centroids>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let rec: CentroidRecord =
                serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
            let id = taxonomy
                .id_of(&rec.path)
                .ok_or_else(|| parse_err(format!("unknown category `{}`", rec.path)))?;
            if std::mem::replace(&mut seen[id.index()], true) {
                return Err(Error::DuplicateCategory(rec.path));
            }
            centroids[id.index()] =
                from_term_pairs(&rec.entries, vocab).map_err(|e| parse_err(e.to_string()))?;
        }
        Self::from_centroids(taxonomy, centroids)
    }

    pub fn load(path: impl AsRef<Path>, taxonomy: &Taxonomy, vocab: &Vocabulary) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_jsonl(BufReader::new(file), taxonomy, vocab)
    }
}

#[derive(Serialize, Deserialize)]
struct CentroidRecord {
    path: String,
    entries: Vec<(String, f64)>,
}

/// Sorts by descending score, breaking ties by ascending path, and keeps `k`.
pub fn rank<'a, F>(mut scores: Vec<(CategoryId, f64)>, path: F, k: usize) -> Vec<(CategoryId, f64)>
where
    F: Fn(CategoryId) -> &'a str,
{
    scores.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| path(a.0).cmp(path(b.0)))
    });
    scores.truncate(k);
    scores
}
