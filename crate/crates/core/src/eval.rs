//! Macro-averaged precision/recall/F1, graded precision@k and ablation
//! tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catvec::CategoryVectors;
use crate::centroid::CentroidModel;
use crate::corpus::Document;
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::similarity::{Classifier, SimilarityConfig};
use crate::tfidf::TfIdfModel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Keyed by category path; only categories seen in gold or predictions.
    pub per_category: BTreeMap<String, Counts>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub documents: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub p_at_k: BTreeMap<usize, f64>,
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let width = self.per_category.keys().map(String::len).max().unwrap_or(0).max(8);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>5} {:>5} {:>5}  {:>9} {:>6} {:>6}", "category", "tp", "fp", "fn", "precision", "recall", "f1");
        for (path, c) in &self.per_category {
            let _ = writeln!(
                out,
                "{path:<width$}  {:>5} {:>5} {:>5}  {:>9.4} {:>6.4} {:>6.4}",
                c.tp,
                c.fp,
                c.fn_,
                c.precision(),
                c.recall(),
                c.f1()
            );
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>17}  {:>9.4} {:>6.4} {:>6.4}",
            "macro", "", self.macro_precision, self.macro_recall, self.macro_f1
        );
        for (k, p) in &self.p_at_k {
            let _ = writeln!(out, "P@{k}: {p:.4}");
        }
        out
    }
}

/// Scores top-1 predictions against gold labels, both keyed by document id.
/// Gold documents without a prediction count as misses; a prediction for a
/// document without gold is an error.
pub fn evaluate_macro(predictions: &BTreeMap<String, String>, gold: &BTreeMap<String, String>) -> Result<EvalReport> {
    if predictions.is_empty() {
        return Err(Error::EmptyEval);
    }
    let orphans: Vec<String> = predictions.keys().filter(|d| !gold.contains_key(*d)).cloned().collect();
    if !orphans.is_empty() {
        return Err(Error::IdMismatch(orphans));
    }
    let mut per_category: BTreeMap<String, Counts> = BTreeMap::new();
    for (doc, truth) in gold {
        match predictions.get(doc) {
            Some(p) if p == truth => per_category.entry(truth.clone()).or_default().tp += 1,
            Some(p) => {
                per_category.entry(p.clone()).or_default().fp += 1;
                per_category.entry(truth.clone()).or_default().fn_ += 1;
            }
            None => per_category.entry(truth.clone()).or_default().fn_ += 1,
        }
    }
    let n = per_category.len() as f64;
    let mean = |f: fn(&Counts) -> f64| per_category.values().map(f).sum::<f64>() / n;
    Ok(EvalReport {
        macro_precision: mean(Counts::precision),
        macro_recall: mean(Counts::recall),
        macro_f1: mean(Counts::f1),
        documents: gold.len(),
        per_category,
        p_at_k: BTreeMap::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grade {
    Relevant,
    Somewhat,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainMap {
    pub relevant: f64,
    pub somewhat: f64,
    pub not: f64,
}

impl Default for GainMap {
    fn default() -> Self {
        GainMap {
            relevant: 1.0,
            somewhat: 0.5,
            not: 0.0,
        }
    }
}

impl GainMap {
    /// Only fully relevant categories count.
    pub fn binary() -> Self {
        GainMap {
            somewhat: 0.0,
            ..Default::default()
        }
    }

    pub fn gain(&self, g: Grade) -> f64 {
        match g {
            Grade::Relevant => self.relevant,
            Grade::Somewhat => self.somewhat,
            Grade::Not => self.not,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct JudgmentRecord {
    doc_id: String,
    path: String,
    grade: Grade,
}

/// Graded relevance of (document, category path) pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelevanceJudgments {
    grades: BTreeMap<String, BTreeMap<String, Grade>>,
}

impl RelevanceJudgments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, doc: impl Into<String>, path: impl Into<String>, grade: Grade) {
        self.grades.entry(doc.into()).or_default().insert(path.into(), grade);
    }

    pub fn grade(&self, doc: &str, path: &str) -> Option<Grade> {
        self.grades.get(doc)?.get(path).copied()
    }

    pub fn docs(&self) -> impl Iterator<Item = &str> {
        self.grades.keys().map(String::as_str)
    }

    /// Reads JSON lines `{"doc_id", "path", "grade"}`. Blank lines are
    /// skipped; a pair graded twice with different grades is an error.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut out = RelevanceJudgments::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<judgments>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: JudgmentRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if let Some(prev) = out.grade(&rec.doc_id, &rec.path) {
                if prev != rec.grade {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("conflicting grades for {} / {}", rec.doc_id, rec.path),
                    });
                }
            }
            out.insert(rec.doc_id, rec.path, rec.grade);
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PrecisionAtK {
    pub values: BTreeMap<usize, f64>,
    /// (document, path) pairs inside some top-k without a judgment.
    pub unjudged: Vec<(String, String)>,
}

/// Mean graded gain of the top `k` categories, for each `k` in `ks`.
/// Short rankings are padded with non-relevant entries and unjudged pairs
/// score 0. `k = 0` is ignored.
pub fn precision_at_k(
    rankings: &BTreeMap<String, Vec<String>>,
    judgments: &RelevanceJudgments,
    ks: &[usize],
    gains: &GainMap,
) -> PrecisionAtK {
    let ks: BTreeSet<usize> = ks.iter().copied().filter(|&k| k > 0).collect();
    let max_k = ks.iter().max().copied().unwrap_or(0);
    let mut sums: BTreeMap<usize, f64> = ks.iter().map(|&k| (k, 0.0)).collect();
    let mut unjudged = BTreeSet::new();
    for (doc, ranking) in rankings {
        let mut cumulative = 0.0;
        for (i, path) in ranking.iter().take(max_k).enumerate() {
            cumulative += match judgments.grade(doc, path) {
                Some(g) => gains.gain(g),
                None => {
                    unjudged.insert((doc.clone(), path.clone()));
                    0.0
                }
            };
            if let Some(s) = sums.get_mut(&(i + 1)) {
                *s += cumulative;
            }
        }
        for k in ks.iter().filter(|&&k| k > ranking.len()) {
            *sums.get_mut(k).expect("k in ks") += cumulative;
        }
    }
    let n = rankings.len();
    PrecisionAtK {
        values: sums
            .into_iter()
            .map(|(k, s)| (k, if n == 0 { 0.0 } else { s / (k * n) as f64 }))
            .collect(),
        unjudged: unjudged.into_iter().collect(),
    }
}

/// Trained artifacts and labeled test documents for comparing measures.
pub struct AblationBundle<'a> {
    pub centroids: &'a CentroidModel,
    pub tfidf: &'a TfIdfModel,
    pub store: Option<&'a EmbeddingStore>,
    pub catvecs: Option<&'a CategoryVectors>,
    pub docs: &'a [Document],
    pub judgments: Option<&'a RelevanceJudgments>,
    pub ks: Vec<usize>,
    pub gains: GainMap,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationRow {
    pub label: String,
    pub config: SimilarityConfig,
    pub report: EvalReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn to_table(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(6);
        let ks: BTreeSet<usize> = self.rows.iter().flat_map(|r| r.report.p_at_k.keys().copied()).collect();
        let mut out = format!("{:<width$}  {:>9} {:>6} {:>6}", "method", "precision", "recall", "f1");
        for k in &ks {
            let _ = write!(out, " {:>6}", format!("P@{k}"));
        }
        out.push('\n');
        for r in &self.rows {
            let e = &r.report;
            let _ = write!(out, "{:<width$}  {:>9.4} {:>6.4} {:>6.4}", r.label, e.macro_precision, e.macro_recall, e.macro_f1);
            for k in &ks {
                match e.p_at_k.get(k) {
                    Some(p) => {
                        let _ = write!(out, " {p:>6.4}");
                    }
                    None => {
                        let _ = write!(out, " {:>6}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Classifies every labeled document under each measure and evaluates.
pub fn ablation_run(bundle: &AblationBundle<'_>, measures: &[SimilarityConfig]) -> Result<AblationTable> {
    if measures.is_empty() {
        return Err(Error::EmptyEval);
    }
    let gold: BTreeMap<String, String> = bundle
        .docs
        .iter()
        .filter_map(|d| d.label.map(|l| (d.id.clone(), bundle.centroids.path(l).to_string())))
        .collect();
    let depth = bundle.ks.iter().copied().max().unwrap_or(1).max(1);
    let mut rows = Vec::with_capacity(measures.len());
    for cfg in measures {
        let classifier = Classifier::new(bundle.centroids, bundle.tfidf, bundle.store, bundle.catvecs, cfg.clone())?;
        let mut predictions = BTreeMap::new();
        let mut rankings = BTreeMap::new();
        for doc in bundle.docs {
            let ranked: Vec<String> = classifier
                .classify(doc, depth)
                .into_iter()
                .map(|(id, _)| bundle.centroids.path(id).to_string())
                .collect();
            if doc.label.is_some() {
                if let Some(top) = ranked.first() {
                    predictions.insert(doc.id.clone(), top.clone());
                }
            }
            rankings.insert(doc.id.clone(), ranked);
        }
        let mut report = evaluate_macro(&predictions, &gold).or_else(|e| match e {
            // no document got any prediction: every gold label is a miss
            Error::EmptyEval if !gold.is_empty() => Ok(all_missed(&gold)),
            e => Err(e),
        })?;
        if let Some(j) = bundle.judgments {
            report.p_at_k = precision_at_k(&rankings, j, &bundle.ks, &bundle.gains).values;
        }
        rows.push(AblationRow {
            label: cfg.label(),
            config: cfg.clone(),
            report,
        });
    }
    Ok(AblationTable { rows })
}

/// Report for a run in which no document received a prediction.
pub fn all_missed(gold: &BTreeMap<String, String>) -> EvalReport {
    let mut per_category: BTreeMap<String, Counts> = BTreeMap::new();
    for truth in gold.values() {
        per_category.entry(truth.clone()).or_default().fn_ += 1;
    }
    EvalReport {
        per_category,
        documents: gold.len(),
        ..Default::default()
    }
}
