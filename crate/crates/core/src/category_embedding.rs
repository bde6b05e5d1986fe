//! Joint training of word and category vectors.
//!
//! Every word with a candidate list gets, at each occurrence, the category
//! whose centroid best matches its surrounding words. That category's
//! vector is then trained to predict the same context as the word itself.

use std::collections::{BTreeSet, HashMap};

use crate::centroid::{rank, CentroidModel};
use crate::embedding::{
    category_init_rng, category_key, random_row, train_from, CategoryResolver, EmbeddingStore, TrainConfig,
    TrainReport, TrainVocab,
};
use crate::error::{Error, Result};
use crate::taxonomy::CategoryId;
use crate::tfidf::{TfIdfModel, Vocabulary};

pub const DEFAULT_CANDIDATES: usize = 3;

/// For each word, the categories whose centroids weigh it most.
#[derive(Clone, Debug, Default)]
pub struct CandidateIndex {
    m: usize,
    entries: HashMap<String, Vec<(CategoryId, f64)>>,
}

impl CandidateIndex {
    /// Keeps up to `m` categories per word, by descending centroid weight
    /// with ties broken by path.
    pub fn build(model: &CentroidModel, vocab: &Vocabulary, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("candidate count must be at least 1".into()));
        }
        let mut per_term: HashMap<u32, Vec<(CategoryId, f64)>> = HashMap::new();
        for id in model.active() {
            for (term, w) in model.centroid(id).iter() {
                per_term.entry(term).or_default().push((id, w));
            }
        }
        let entries = per_term
            .into_iter()
            .map(|(term, scores)| (vocab.term(term).to_string(), rank(scores, |id| model.path(id), m)))
            .collect();
        Ok(CandidateIndex { m, entries })
    }

    /// An index with no candidates; training with it learns words only.
    pub fn empty() -> Self {
        CandidateIndex::default()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn candidates(&self, word: &str) -> &[(CategoryId, f64)] {
        self.entries.get(word).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every category that appears in some candidate list, ascending.
    pub fn categories(&self) -> Vec<CategoryId> {
        let set: BTreeSet<CategoryId> = self.entries.values().flatten().map(|(id, _)| *id).collect();
        set.into_iter().collect()
    }
}

/// Picks the candidate category of `target` whose centroid is closest to
/// the tf-idf vector of `context`. A word with one candidate always gets
/// it; when no candidate matches the context the heaviest one is used.
pub fn disambiguate<S: AsRef<str>>(
    index: &CandidateIndex,
    model: &CentroidModel,
    tfidf: &TfIdfModel,
    target: &str,
    context: &[S],
) -> Option<CategoryId> {
    let cands: Vec<CategoryId> = index.candidates(target).iter().map(|(id, _)| *id).collect();
    choose(&cands, model, tfidf, context)
}

fn choose<S: AsRef<str>>(
    cands: &[CategoryId],
    model: &CentroidModel,
    tfidf: &TfIdfModel,
    context: &[S],
) -> Option<CategoryId> {
    match cands {
        [] => None,
        [only] => Some(*only),
        _ => {
            let v = tfidf.transform_tokens(context);
            model.best_among(&v, cands).or(Some(cands[0]))
        }
    }
}

struct IndexResolver<'a> {
    words: Vec<String>,
    candidates: Vec<Vec<CategoryId>>,
    rows: HashMap<CategoryId, usize>,
    model: &'a CentroidModel,
    tfidf: &'a TfIdfModel,
}

impl CategoryResolver for IndexResolver<'_> {
    fn resolve(&self, sentence: &[u32], pos: usize, window: usize) -> Option<usize> {
        let cands = &self.candidates[sentence[pos] as usize];
        if cands.is_empty() {
            return None;
        }
        let lo = pos.saturating_sub(window);
        let hi = (pos + window).min(sentence.len() - 1);
        let context: Vec<&str> = sentence[lo..=hi].iter().map(|&w| self.words[w as usize].as_str()).collect();
        choose(cands, self.model, self.tfidf, &context).map(|id| self.rows[&id])
    }
}

/// Continues training `store` on `corpus` while learning a `cat:` vector for
/// every category in `index`. Category vectors already in the store are
/// the starting point; the rest start from small random values.
pub fn train_category_embedding(
    corpus: &[Vec<String>],
    index: &CandidateIndex,
    model: &CentroidModel,
    tfidf: &TfIdfModel,
    store: &EmbeddingStore,
    config: &TrainConfig,
) -> Result<(EmbeddingStore, TrainReport)> {
    let categories = index.categories();
    let mut rng = category_init_rng(config.seed);
    let extra_rows: Vec<(String, Vec<f64>)> = categories
        .iter()
        .map(|&id| {
            let key = category_key(model.path(id));
            let init = match store.get(&key) {
                Some(v) => v.to_vec(),
                None => random_row(&mut rng, config.dim),
            };
            (key, init)
        })
        .collect();

    let (trained, report) = train_from(corpus, store, config, extra_rows, |vocab: &TrainVocab, first| {
        IndexResolver {
            words: vocab.words().to_vec(),
            candidates: vocab
                .words()
                .iter()
                .map(|w| index.candidates(w).iter().map(|(id, _)| *id).collect())
                .collect(),
            rows: categories.iter().enumerate().map(|(i, id)| (*id, first + i)).collect(),
            model,
            tfidf,
        }
    })?;
    log::info!(
        "trained {} category vectors; {} target occurrences resolved",
        categories.len(),
        report.resolved_targets
    );
    Ok((trained, report))
}
