use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;
use taxovec::catvec::CategoryVectors;
use taxovec::category_embedding::{train_category_embedding, CandidateIndex};
use taxovec::corpus::{load_documents, read_sentences, Document, Tokenizer};
use taxovec::embedding::{init_store, load_word2vec_text, save_word2vec_text, train_skipgram, TrainReport};
use taxovec::eval::{
    ablation_run, all_missed, evaluate_macro, precision_at_k, AblationBundle, GainMap, RelevanceJudgments,
};
use taxovec::similarity::Classifier;
use taxovec::{CentroidModel, EmbeddingStore, Error, Measure, Result, SimilarityConfig, Taxonomy, TfIdfModel};

use crate::artifacts::{self, Models, RankingLine, Scored};
use crate::config::{CatvecSource, PipelineConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum TrainMode {
    #[default]
    Plain,
    Category,
}

pub fn build(cfg: &PipelineConfig, out: &mut dyn Write) -> Result<()> {
    let taxonomy = Taxonomy::load(cfg.require(&cfg.paths.taxonomy, "taxonomy")?)?;
    let tokenizer = Tokenizer::new(cfg.tokenizer.clone());
    let (docs, report) = load_documents(cfg.require(&cfg.paths.documents, "docs")?, &taxonomy, &tokenizer)?;
    for (id, label) in &report.rejected {
        warn!("document {id}: unknown category `{label}`");
    }
    let dir = cfg.require(&cfg.paths.output, "out")?;

    let tfidf = TfIdfModel::fit(&docs, cfg.tfidf.clone())?;
    let mut centroids = CentroidModel::build(&taxonomy, &docs, &tfidf);
    if let Some(lambda) = cfg.merge_lambda {
        centroids = centroids.merge_descendants(&taxonomy, lambda)?;
    }
    let mut per_category = vec![0usize; taxonomy.len()];
    for d in &docs {
        if let Some(l) = d.label {
            per_category[l.index()] += 1;
        }
    }

    artifacts::create_dir(dir)?;
    let models = Models {
        taxonomy,
        tfidf,
        centroids,
    };
    models.save(dir)?;
    cfg.write_to(dir)?;

    let mut text = String::new();
    let root = models.taxonomy.root();
    let _ = writeln!(
        text,
        "categories: {} under {}",
        models.taxonomy.len() - 1,
        models.taxonomy.path(root)
    );
    let _ = writeln!(text, "documents: {}", report.summary());
    let _ = writeln!(text, "vocabulary: {} terms", models.tfidf.vocab().len());
    let _ = writeln!(text, "centroids: {} non-empty", models.centroids.active().count());
    for c in models.taxonomy.categories() {
        let _ = writeln!(text, "  {:>6}  {}", per_category[c.id.index()], c.path);
    }
    emit(out, &text)
}

/// Reads the training corpus: plain sentences from `corpus`, else the texts
/// of the documents file.
fn training_corpus(cfg: &PipelineConfig, corpus: Option<&Path>) -> Result<Vec<Vec<String>>> {
    let tokenizer = Tokenizer::new(cfg.tokenizer.clone());
    if let Some(path) = corpus {
        return read_sentences(path, &tokenizer);
    }
    let path = cfg
        .paths
        .documents
        .as_deref()
        .ok_or_else(|| Error::Config("training needs --corpus or --docs".into()))?;
    Ok(artifacts::read_document_records(path)?
        .into_iter()
        .map(|r| tokenizer.tokenize(&r.text))
        .filter(|t| !t.is_empty())
        .collect())
}

pub fn train(cfg: &PipelineConfig, mode: TrainMode, corpus: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let dir = cfg.require(&cfg.paths.output, "out")?;
    let sentences = training_corpus(cfg, corpus)?;
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let train = &cfg.train;
    let (store, report) = match mode {
        TrainMode::Plain => train_skipgram(&sentences, train)?,
        TrainMode::Category => {
            let models = Models::load(cfg.require(&cfg.paths.models, "models")?)?;
            let index = if cfg.candidates == 0 {
                CandidateIndex::empty()
            } else {
                CandidateIndex::build(&models.centroids, models.tfidf.vocab(), cfg.candidates)?
            };
            info!("candidate index covers {} words", index.len());
            let start = match &cfg.paths.embeddings {
                Some(path) => load_word2vec_text(path)?,
                None => init_store(&sentences, train)?,
            };
            train_category_embedding(&sentences, &index, &models.centroids, &models.tfidf, &start, train)?
        }
    };

    artifacts::create_dir(dir)?;
    save_word2vec_text(artifacts::store_path(dir), &store)?;
    artifacts::write_file(&dir.join("train_log.tsv"), loss_log(&report).as_bytes())?;
    cfg.write_to(dir)?;

    let mut text = String::new();
    let _ = writeln!(text, "vocabulary: {} words", report.vocab_size);
    let _ = writeln!(text, "vectors: {} x {}", store.len(), store.dim());
    let _ = writeln!(text, "pairs: {}", report.pairs);
    if mode == TrainMode::Category {
        let _ = writeln!(text, "resolved targets: {}", report.resolved_targets);
    }
    text.push_str(&loss_log(&report));
    emit(out, &text)
}

fn loss_log(report: &TrainReport) -> String {
    let mut text = String::from("epoch\tloss\n");
    for (i, loss) in report.epoch_losses.iter().enumerate() {
        let _ = writeln!(text, "{}\t{loss:.6}", i + 1);
    }
    text
}

pub fn gen_catvecs(cfg: &PipelineConfig, append_to: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let models = Models::load(cfg.require(&cfg.paths.models, "models")?)?;
    let store = load_word2vec_text(cfg.require(&cfg.paths.embeddings, "embeddings")?)?;
    let dir = cfg.require(&cfg.paths.output, "out")?;
    let mut target = match append_to {
        Some(path) => load_word2vec_text(path)?,
        None => store.clone(),
    };
    if target.dim() != store.dim() {
        return Err(Error::Config(format!(
            "store to append to has dimension {}, embeddings have {}",
            target.dim(),
            store.dim()
        )));
    }
    let vectors = CategoryVectors::generate(&models.centroids, models.tfidf.vocab(), &store);
    vectors.append_to(&mut target, &models.centroids)?;

    artifacts::create_dir(dir)?;
    save_word2vec_text(artifacts::store_path(dir), &target)?;
    artifacts::write_json(&dir.join("catvecs_report.json"), &vectors.report())?;
    cfg.write_to(dir)?;

    let zero = vectors.report().iter().filter(|r| r.zero).count();
    let mut text = format!("category vectors: {} ({zero} zero)\n", vectors.len());
    for r in vectors.report().iter().filter(|r| r.skipped_mass > 0.0) {
        let _ = writeln!(text, "  skipped mass {:.6}  {}", r.skipped_mass, r.path);
    }
    emit(out, &text)
}

/// Embeddings and category vectors required by `similarity`.
struct Resources {
    store: Option<EmbeddingStore>,
    catvecs: Option<CategoryVectors>,
}

fn load_resources(cfg: &PipelineConfig, models: &Models, measures: &[Measure]) -> Result<Resources> {
    let needs_store = measures.iter().any(|m| m.needs_embeddings());
    let needs_catvecs = measures.iter().any(|m| m.needs_category_vectors());
    let store = match (&cfg.paths.embeddings, needs_store) {
        (_, false) => None,
        (Some(path), true) => Some(load_word2vec_text(path)?),
        (None, true) => {
            return Err(Error::Config(format!(
                "measure `{}` needs --embeddings",
                measures.iter().find(|m| m.needs_embeddings()).expect("some measure needs embeddings")
            )))
        }
    };
    let catvecs = match (&store, needs_catvecs) {
        (Some(store), true) => Some(category_vectors(cfg.catvecs, models, store)?),
        _ => None,
    };
    Ok(Resources { store, catvecs })
}

fn category_vectors(source: CatvecSource, models: &Models, store: &EmbeddingStore) -> Result<CategoryVectors> {
    let algebraic = || CategoryVectors::generate(&models.centroids, models.tfidf.vocab(), store);
    Ok(match source {
        CatvecSource::Algebraic => algebraic(),
        CatvecSource::Store | CatvecSource::Auto => {
            let stored = CategoryVectors::from_store(&models.centroids, store);
            if !stored.is_empty() {
                stored
            } else if source == CatvecSource::Auto {
                info!("no category vectors in the store; composing them from centroids");
                algebraic()
            } else {
                return Err(Error::Config("the embeddings store has no `cat:` vectors".into()));
            }
        }
    })
}

#[derive(Serialize)]
struct Header<'a> {
    #[serde(flatten)]
    params: &'a SimilarityConfig,
    k: usize,
}

pub fn classify(cfg: &PipelineConfig, neighbor_index: bool, out: &mut dyn Write) -> Result<()> {
    let models = Models::load(cfg.require(&cfg.paths.models, "models")?)?;
    let sim = &cfg.similarity;
    let input = cfg.paths.documents.clone().unwrap_or_else(|| PathBuf::from("-"));
    let records = artifacts::read_document_records(&input)?;
    let tokenizer = Tokenizer::new(cfg.tokenizer.clone());
    let docs: Vec<Document> = records.into_iter().map(|r| Document::new(r.id, r.text, &tokenizer)).collect();

    let mut lines = Vec::new();
    if !docs.is_empty() {
        let res = load_resources(cfg, &models, &[sim.measure])?;
        let mut classifier =
            Classifier::new(&models.centroids, &models.tfidf, res.store.as_ref(), res.catvecs.as_ref(), sim.clone())?;
        if neighbor_index {
            classifier = classifier.with_neighbor_index();
        }
        let header = Header {
            params: sim,
            k: cfg.k,
        };
        lines.push(serde_json::to_string(&header)?);
        for doc in &docs {
            let ranking = classifier
                .classify(doc, cfg.k)
                .into_iter()
                .map(|(id, score)| Scored {
                    category: models.centroids.path(id).to_string(),
                    score,
                })
                .collect();
            lines.push(serde_json::to_string(&RankingLine {
                id: doc.id.clone(),
                ranking,
            })?);
        }
    }
    let mut text = String::new();
    for l in &lines {
        text.push_str(l);
        text.push('\n');
    }
    match &cfg.paths.output {
        Some(dir) => {
            artifacts::create_dir(dir)?;
            artifacts::write_file(&dir.join("rankings.jsonl"), text.as_bytes())?;
            cfg.write_to(dir)
        }
        None => emit(out, &text),
    }
}

pub struct EvalInputs<'a> {
    pub predictions: &'a Path,
    pub gold: Option<&'a Path>,
    pub judgments: Option<&'a Path>,
    pub ks: &'a [usize],
    pub binary: bool,
}

fn gains(binary: bool) -> GainMap {
    if binary {
        GainMap::binary()
    } else {
        GainMap::default()
    }
}

/// Ids present on one side only, formatted for the mismatch error.
fn unmatched<'a>(
    ours: impl Iterator<Item = &'a str> + Clone,
    theirs: impl Iterator<Item = &'a str> + Clone,
    ours_name: &str,
    theirs_name: &str,
) -> Vec<String> {
    let a: std::collections::BTreeSet<&str> = ours.collect();
    let b: std::collections::BTreeSet<&str> = theirs.collect();
    let mut out: Vec<String> = a.difference(&b).map(|id| format!("{id} (no {theirs_name})")).collect();
    out.extend(b.difference(&a).map(|id| format!("{id} (no {ours_name})")));
    out
}

pub fn evaluate(cfg: &PipelineConfig, inputs: &EvalInputs<'_>, out: &mut dyn Write) -> Result<()> {
    if inputs.gold.is_none() && inputs.judgments.is_none() {
        return Err(Error::Config("evaluate needs --gold, --judgments, or both".into()));
    }
    let dir = cfg.require(&cfg.paths.output, "out")?;
    let rankings = artifacts::read_rankings(inputs.predictions)?;
    if rankings.is_empty() {
        return Err(Error::EmptyEval);
    }

    let mut text = String::new();
    let mut report = None;
    if let Some(path) = inputs.gold {
        let gold = artifacts::read_gold(path)?;
        let missing = unmatched(
            rankings.keys().map(String::as_str),
            gold.keys().map(String::as_str),
            "prediction",
            "gold label",
        );
        if !missing.is_empty() {
            return Err(Error::IdMismatch(missing));
        }
        let top1: BTreeMap<String, String> = rankings
            .iter()
            .filter_map(|(id, r)| r.first().map(|c| (id.clone(), c.clone())))
            .collect();
        report = Some(if top1.is_empty() {
            all_missed(&gold)
        } else {
            evaluate_macro(&top1, &gold)?
        });
    }

    let mut pk = None;
    if let Some(path) = inputs.judgments {
        let judgments = RelevanceJudgments::load(path)?;
        let unjudged_docs: Vec<String> = {
            let judged: std::collections::BTreeSet<&str> = judgments.docs().collect();
            rankings.keys().filter(|id| !judged.contains(id.as_str())).map(|id| format!("{id} (no judgments)")).collect()
        };
        if !unjudged_docs.is_empty() {
            return Err(Error::IdMismatch(unjudged_docs));
        }
        let ks: Vec<usize> = if inputs.ks.is_empty() { vec![cfg.k] } else { inputs.ks.to_vec() };
        let p = precision_at_k(&rankings, &judgments, &ks, &gains(inputs.binary));
        if !p.unjudged.is_empty() {
            warn!("{} ranked pairs have no judgment and score 0", p.unjudged.len());
        }
        if let Some(r) = &mut report {
            r.p_at_k = p.values.clone();
        }
        pk = Some(p);
    }

    artifacts::create_dir(dir)?;
    if let Some(r) = &report {
        artifacts::write_json(&dir.join("report.json"), r)?;
        text.push_str(&r.to_table());
    }
    if let Some(p) = &pk {
        artifacts::write_json(&dir.join("precision_at_k.json"), p)?;
        if report.is_none() {
            for (k, v) in &p.values {
                let _ = writeln!(text, "P@{k}: {v:.4}");
            }
        }
        if !p.unjudged.is_empty() {
            let _ = writeln!(text, "unjudged pairs: {}", p.unjudged.len());
        }
    }
    artifacts::write_file(&dir.join("report.txt"), text.as_bytes())?;
    cfg.write_to(dir)?;
    emit(out, &text)
}

pub struct AblationInputs<'a> {
    pub measures: &'a [Measure],
    pub alphas: &'a [f64],
    pub thetas: &'a [f64],
    pub judgments: Option<&'a Path>,
    pub ks: &'a [usize],
    pub binary: bool,
}

/// Similarity settings for every measure, crossed with the swept thetas and
/// (for the pseudo-word measure) alphas.
pub fn ablation_grid(base: &SimilarityConfig, measures: &[Measure], thetas: &[f64], alphas: &[f64]) -> Vec<SimilarityConfig> {
    let one = |xs: &[f64], x: f64| if xs.is_empty() { vec![x] } else { xs.to_vec() };
    let mut out = Vec::new();
    for &measure in measures {
        let thetas = if matches!(measure, Measure::WordLevel | Measure::CategoryWordLevel) { one(thetas, base.theta) } else { vec![base.theta] };
        let alphas = if measure == Measure::CategoryWordLevel { one(alphas, base.alpha) } else { vec![base.alpha] };
        for &theta in &thetas {
            for &alpha in &alphas {
                out.push(SimilarityConfig {
                    measure,
                    theta,
                    alpha,
                    ..base.clone()
                });
            }
        }
    }
    out
}

pub fn ablate(cfg: &PipelineConfig, inputs: &AblationInputs<'_>, out: &mut dyn Write) -> Result<()> {
    let models = Models::load(cfg.require(&cfg.paths.models, "models")?)?;
    let tokenizer = Tokenizer::new(cfg.tokenizer.clone());
    let (docs, report) = load_documents(cfg.require(&cfg.paths.documents, "docs")?, &models.taxonomy, &tokenizer)?;
    if !report.rejected.is_empty() {
        warn!("{} documents have labels outside the taxonomy and are skipped", report.rejected.len());
    }
    let dir = cfg.require(&cfg.paths.output, "out")?;
    let measures = if inputs.measures.is_empty() { Measure::ALL.as_slice() } else { inputs.measures };
    let configs = ablation_grid(&cfg.similarity, measures, inputs.thetas, inputs.alphas);
    for c in &configs {
        c.validate()?;
    }
    let res = load_resources(cfg, &models, measures)?;
    let judgments = inputs.judgments.map(RelevanceJudgments::load).transpose()?;
    let bundle = AblationBundle {
        centroids: &models.centroids,
        tfidf: &models.tfidf,
        store: res.store.as_ref(),
        catvecs: res.catvecs.as_ref(),
        docs: &docs,
        judgments: judgments.as_ref(),
        ks: if inputs.ks.is_empty() { vec![cfg.k] } else { inputs.ks.to_vec() },
        gains: gains(inputs.binary),
    };
    let table = ablation_run(&bundle, &configs)?;

    artifacts::create_dir(dir)?;
    artifacts::write_json(&dir.join("ablation.json"), &table.rows)?;
    let text = table.to_table();
    artifacts::write_file(&dir.join("ablation.txt"), text.as_bytes())?;
    cfg.write_to(dir)?;
    emit(out, &text)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| artifacts::io_err(Path::new("<stdout>"), e))
}

/// Standard output, for the binary.
pub fn stdout() -> io::StdoutLock<'static> {
    io::stdout().lock()
}
