//! Vocabulary, document frequencies and tf-idf weighting.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::sparse::{SparseVector, TermId};

/// Term strings with dense ids. Ids follow lexicographic term order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, TermId>,
}

impl Vocabulary {
    pub fn from_sorted(terms: Vec<String>) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
        Vocabulary { terms, index }
    }

    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut terms: Vec<String> = terms.into_iter().map(Into::into).collect();
        terms.sort();
        terms.dedup();
        Self::from_sorted(terms)
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusStats {
    pub n_docs: usize,
    /// Indexed by term id.
    pub df: Vec<u32>,
    pub vocab: Vocabulary,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TfScheme {
    #[default]
    Raw,
    /// `1 + ln(count)`
    Log,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdfScheme {
    /// `ln((1 + N) / (1 + df)) + 1`
    #[default]
    Smoothed,
    /// Every term weighs 1. Mostly useful for fixtures.
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TfIdfConfig {
    /// Minimum total occurrences for a token to enter the vocabulary.
    pub min_count: usize,
    pub tf: TfScheme,
    pub idf: IdfScheme,
    pub normalize: bool,
}

impl Default for TfIdfConfig {
    fn default() -> Self {
        TfIdfConfig {
            min_count: 1,
            tf: TfScheme::Raw,
            idf: IdfScheme::Smoothed,
            normalize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TfIdfModel {
    pub stats: CorpusStats,
    pub config: TfIdfConfig,
    idf: Vec<f64>,
}

fn idf_values(stats: &CorpusStats, scheme: IdfScheme) -> Vec<f64> {
    let n = stats.n_docs as f64;
    stats
        .df
        .iter()
        .map(|&df| match scheme {
            IdfScheme::Smoothed => ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0,
            IdfScheme::Unit => 1.0,
        })
        .collect()
}

impl TfIdfModel {
    pub fn from_stats(stats: CorpusStats, config: TfIdfConfig) -> Self {
        let idf = idf_values(&stats, config.idf);
        TfIdfModel { stats, config, idf }
    }

    /// Fits on token lists.
    pub fn fit_tokens<'a, I>(docs: I, config: TfIdfConfig) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut counts: BTreeMap<&str, (usize, u32)> = BTreeMap::new();
        let mut n_docs = 0;
        let mut nonempty = false;
        for tokens in docs {
            n_docs += 1;
            nonempty |= !tokens.is_empty();
            let mut seen: Vec<&str> = Vec::with_capacity(tokens.len());
            for t in tokens {
                counts.entry(t.as_str()).or_insert((0, 0)).0 += 1;
                seen.push(t.as_str());
            }
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                counts.get_mut(t).expect("counted above").1 += 1;
            }
        }
        if !nonempty {
            return Err(Error::EmptyCorpus);
        }
        let kept: Vec<(&str, u32)> = counts
            .into_iter()
            .filter(|(_, (total, _))| *total >= config.min_count)
            .map(|(t, (_, df))| (t, df))
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let vocab = Vocabulary::from_sorted(kept.iter().map(|(t, _)| t.to_string()).collect());
        let df = kept.iter().map(|(_, df)| *df).collect();
        Ok(Self::from_stats(CorpusStats { n_docs, df, vocab }, config))
    }

    pub fn fit(docs: &[Document], config: TfIdfConfig) -> Result<Self> {
        Self::fit_tokens(docs.iter().map(|d| d.tokens.as_slice()), config)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.stats.vocab
    }

    pub fn idf(&self, term: TermId) -> f64 {
        self.idf[term as usize]
    }

    pub fn transform_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> SparseVector {
        let mut counts: BTreeMap<TermId, usize> = BTreeMap::new();
        for t in tokens {
            if let Some(id) = self.stats.vocab.id(t.as_ref()) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        let entries: Vec<(TermId, f64)> = counts
            .into_iter()
            .map(|(id, c)| {
                let tf = match self.config.tf {
                    TfScheme::Raw => c as f64,
                    TfScheme::Log => 1.0 + (c as f64).ln(),
                };
                (id, tf * self.idf(id))
            })
            .collect();
        let v = SparseVector::from_sorted_unchecked(entries);
        if self.config.normalize {
            v.normalized()
        } else {
            v
        }
    }

    pub fn transform(&self, doc: &Document) -> SparseVector {
        self.transform_tokens(&doc.tokens)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, &TfIdfFile::from(self))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let f: TfIdfFile = serde_json::from_reader(BufReader::new(file))?;
        f.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TfIdfFile {
    n_docs: usize,
    config: TfIdfConfig,
    /// `[term, df]` in term-id order.
    terms: Vec<(String, u32)>,
}

impl From<&TfIdfModel> for TfIdfFile {
    fn from(m: &TfIdfModel) -> Self {
        TfIdfFile {
            n_docs: m.stats.n_docs,
            config: m.config.clone(),
            terms: m
                .stats
                .vocab
                .terms()
                .iter()
                .cloned()
                .zip(m.stats.df.iter().copied())
                .collect(),
        }
    }
}

impl TryFrom<TfIdfFile> for TfIdfModel {
    type Error = Error;

    fn try_from(f: TfIdfFile) -> Result<Self> {
        if f.terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Config("tf-idf terms must be strictly sorted".into()));
        }
        if f.terms.iter().any(|(_, df)| *df == 0 || *df as usize > f.n_docs) {
            return Err(Error::Config("document frequency out of range".into()));
        }
        let (terms, df): (Vec<String>, Vec<u32>) = f.terms.into_iter().unzip();
        let stats = CorpusStats {
            n_docs: f.n_docs,
            df,
            vocab: Vocabulary::from_sorted(terms),
        };
        Ok(TfIdfModel::from_stats(stats, f.config))
    }
}

/// `[[term, weight], ...]` with term strings in place of ids.
pub fn to_term_pairs(v: &SparseVector, vocab: &Vocabulary) -> Vec<(String, f64)> {
    v.iter().map(|(t, w)| (vocab.term(t).to_string(), w)).collect()
}

pub fn from_term_pairs(pairs: &[(String, f64)], vocab: &Vocabulary) -> Result<SparseVector> {
    let entries = pairs
        .iter()
        .map(|(term, w)| {
            vocab
                .id(term)
                .map(|id| (id, *w))
                .ok_or_else(|| Error::NotFound(format!("term `{term}` not in vocabulary")))
        })
        .collect::<Result<Vec<_>>>()?;
    SparseVector::from_entries(entries)
}
