//! Skip-gram with negative sampling.
//!
//! Parameters live in matrices of relaxed atomics so several workers can
//! update them without locks (Hogwild-style). With one worker every run is
//! a deterministic function of the seed.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sgns::{joint_loss_grad, pair_loss_grad};
use super::store::EmbeddingStore;
use crate::error::{Error, Result};

const WORD_INIT_STREAM: u64 = 0;
const WORKER_STREAM_BASE: u64 = 1;
pub(crate) const CATEGORY_INIT_STREAM: u64 = 1 << 32;
const LEARNING_RATE_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    /// Context words taken on each side of the target.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    /// Frequent-word subsampling threshold; 0 disables it.
    pub subsample: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            window: 5,
            negatives: 15,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 1,
            subsample: 1e-3,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("workers", self.workers),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.subsample.is_nan() || self.subsample < 0.0 {
            return Err(Error::Config("subsample threshold must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean per-pair loss of each epoch.
    pub epoch_losses: Vec<f64>,
    pub pairs: u64,
    pub vocab_size: usize,
    /// Target positions whose category was resolved (category training only).
    pub resolved_targets: u64,
}

/// Training vocabulary ordered by descending count, then by word.
#[derive(Clone, Debug)]
pub struct TrainVocab {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl TrainVocab {
    pub fn build<F>(corpus: &[Vec<String>], min_count: usize, allowed: F) -> Self
    where
        F: Fn(&str) -> bool,
    {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for sentence in corpus {
            for t in sentence {
                *counts.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|(w, c)| *c >= min_count as u64 && allowed(w))
            .collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let words: Vec<String> = entries.iter().map(|e| e.0.to_string()).collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        TrainVocab {
            words,
            counts: entries.iter().map(|e| e.1).collect(),
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, i: u32) -> &str {
        &self.words[i as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, w: &str) -> Option<u32> {
        self.index.get(w).copied()
    }

    pub fn count(&self, i: u32) -> u64 {
        self.counts[i as usize]
    }

    fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn encode(&self, corpus: &[Vec<String>]) -> Vec<Vec<u32>> {
        corpus
            .iter()
            .map(|s| s.iter().filter_map(|t| self.id(t)).collect::<Vec<_>>())
            .filter(|s: &Vec<u32>| !s.is_empty())
            .collect()
    }
}

/// Draws negatives from the unigram distribution raised to 3/4.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: impl IntoIterator<Item = u64>) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .into_iter()
            .map(|c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NegativeSampler { cumulative }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let total = *self.cumulative.last().expect("nonempty vocabulary");
        let r = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= r);
        i.min(self.cumulative.len() - 1) as u32
    }
}

/// Row-major matrix of f64 stored as atomic bit patterns.
pub(crate) struct SharedMatrix {
    dim: usize,
    data: Vec<AtomicU64>,
}

impl SharedMatrix {
    pub(crate) fn from_vec(dim: usize, v: Vec<f64>) -> Self {
        SharedMatrix {
            dim,
            data: v.into_iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
        }
    }

    pub(crate) fn into_vec(self) -> Vec<f64> {
        self.data.into_iter().map(|a| f64::from_bits(a.into_inner())).collect()
    }

    fn read(&self, row: usize, out: &mut [f64]) {
        let cells = &self.data[row * self.dim..(row + 1) * self.dim];
        for (o, a) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn row(&self, row: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        self.read(row, &mut v);
        v
    }

    /// `row += scale * delta`; concurrent writers may lose updates.
    fn add(&self, row: usize, delta: &[f64], scale: f64) {
        let cells = &self.data[row * self.dim..(row + 1) * self.dim];
        for (a, d) in cells.iter().zip(delta) {
            let x = f64::from_bits(a.load(Ordering::Relaxed));
            a.store((x + scale * d).to_bits(), Ordering::Relaxed);
        }
    }
}

/// Maps a target position to the input row of its category, if any.
pub(crate) trait CategoryResolver: Sync {
    fn resolve(&self, sentence: &[u32], pos: usize, window: usize) -> Option<usize>;
}

pub(crate) struct NoCategories;

impl CategoryResolver for NoCategories {
    fn resolve(&self, _: &[u32], _: usize, _: usize) -> Option<usize> {
        None
    }
}

fn uniform_init(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<f64> {
    let half = 0.5 / dim as f64;
    (0..n * dim).map(|_| rng.gen_range(-half..half)).collect()
}

pub(crate) fn category_init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CATEGORY_INIT_STREAM);
    rng
}

pub(crate) fn random_row(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    uniform_init(rng, 1, dim)
}

/// Fresh store for `corpus`: input vectors uniform in `[-0.5/dim, 0.5/dim)`,
/// output vectors zero.
pub fn init_store(corpus: &[Vec<String>], config: &TrainConfig) -> Result<EmbeddingStore> {
    config.validate()?;
    let vocab = TrainVocab::build(corpus, config.min_count, |_| true);
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(WORD_INIT_STREAM);
    let input = uniform_init(&mut rng, vocab.len(), config.dim);
    let output = vec![0.0; vocab.len() * config.dim];
    Ok(EmbeddingStore::from_parts(
        config.dim,
        vocab.words.clone(),
        input,
        Some(output),
    ))
}

/// Trains word vectors from scratch.
pub fn train_skipgram(
    corpus: &[Vec<String>],
    config: &TrainConfig,
) -> Result<(EmbeddingStore, TrainReport)> {
    let store = init_store(corpus, config)?;
    train_from(corpus, &store, config, Vec::new(), |_, _| NoCategories)
}

/// Continues training from `store`. Words of `corpus` missing from the store
/// are ignored. `extra_rows` are appended to the input matrix after the
/// word rows; `make_resolver` receives the training vocabulary and the index
/// of the first extra row.
pub(crate) fn train_from<R, F>(
    corpus: &[Vec<String>],
    store: &EmbeddingStore,
    config: &TrainConfig,
    extra_rows: Vec<(String, Vec<f64>)>,
    make_resolver: F,
) -> Result<(EmbeddingStore, TrainReport)>
where
    R: CategoryResolver,
    F: FnOnce(&TrainVocab, usize) -> R,
{
    config.validate()?;
    if store.dim() != config.dim {
        return Err(Error::Config(format!(
            "store has dimension {}, config asks for {}",
            store.dim(),
            config.dim
        )));
    }
    let vocab = TrainVocab::build(corpus, config.min_count, |w| {
        store.contains(w) && !super::store::is_category_key(w)
    });
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let dim = config.dim;
    let n_words = vocab.len();

    let mut input = Vec::with_capacity((n_words + extra_rows.len()) * dim);
    let mut output = Vec::with_capacity(n_words * dim);
    for w in &vocab.words {
        input.extend_from_slice(store.get(w).expect("filtered to store keys"));
        match store.get_output(w) {
            Some(o) => output.extend_from_slice(o),
            None => output.extend(std::iter::repeat_n(0.0, dim)),
        }
    }
    let mut keys = vocab.words.clone();
    for (key, v) in &extra_rows {
        if v.len() != dim {
            return Err(Error::Config(format!("initial vector for `{key}` has wrong width")));
        }
        keys.push(key.clone());
        input.extend_from_slice(v);
    }

    let resolver = make_resolver(&vocab, n_words);
    let sentences = vocab.encode(corpus);
    let shared = Shared {
        config,
        sampler: NegativeSampler::new(vocab.counts.iter().copied()),
        keep_prob: keep_probabilities(&vocab, config.subsample),
        input: SharedMatrix::from_vec(dim, input),
        output: SharedMatrix::from_vec(dim, output),
        processed: AtomicU64::new(0),
        total_work: config.epochs as u64 * vocab.total(),
        resolver: &resolver,
    };

    let workers = config.workers.min(sentences.len().max(1));
    let mut rngs: Vec<ChaCha8Rng> = (0..workers)
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(WORKER_STREAM_BASE + w as u64);
            rng
        })
        .collect();
    let chunk = sentences.len().div_ceil(workers).max(1);

    let mut report = TrainReport {
        vocab_size: n_words,
        ..Default::default()
    };
    for epoch in 0..config.epochs {
        let stats: Vec<EpochStats> = if workers == 1 {
            vec![shared.run(&sentences, &mut rngs[0])]
        } else {
            thread::scope(|s| {
                let handles: Vec<_> = rngs
                    .iter_mut()
                    .zip(sentences.chunks(chunk))
                    .map(|(rng, part)| {
                        let shared = &shared;
                        s.spawn(move || shared.run(part, rng))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            })
        };
        let total = stats.iter().fold(EpochStats::default(), |a, b| a.merge(b));
        let mean = if total.pairs == 0 {
            0.0
        } else {
            total.loss / total.pairs as f64
        };
        log::info!("epoch {}: mean pair loss {mean:.6} over {} pairs", epoch + 1, total.pairs);
        report.epoch_losses.push(mean);
        report.pairs += total.pairs;
        report.resolved_targets += total.resolved;
    }

    let Shared { input, output, .. } = shared;
    let input = input.into_vec();
    let mut output = output.into_vec();
    output.extend(std::iter::repeat_n(0.0, extra_rows.len() * dim));
    Ok((EmbeddingStore::from_parts(dim, keys, input, Some(output)), report))
}

/// Probability of keeping each occurrence of a word under subsampling.
fn keep_probabilities(vocab: &TrainVocab, threshold: f64) -> Vec<f64> {
    let total = vocab.total() as f64;
    vocab
        .counts
        .iter()
        .map(|&c| {
            if threshold <= 0.0 {
                return 1.0;
            }
            let st = threshold * total;
            let c = c as f64;
            (((c / st).sqrt() + 1.0) * st / c).min(1.0)
        })
        .collect()
}

#[derive(Default, Clone, Copy)]
struct EpochStats {
    loss: f64,
    pairs: u64,
    resolved: u64,
}

impl EpochStats {
    fn merge(self, o: &EpochStats) -> EpochStats {
        EpochStats {
            loss: self.loss + o.loss,
            pairs: self.pairs + o.pairs,
            resolved: self.resolved + o.resolved,
        }
    }
}

struct Shared<'a, R> {
    config: &'a TrainConfig,
    sampler: NegativeSampler,
    keep_prob: Vec<f64>,
    input: SharedMatrix,
    output: SharedMatrix,
    processed: AtomicU64,
    total_work: u64,
    resolver: &'a R,
}

impl<R: CategoryResolver> Shared<'_, R> {
    fn learning_rate(&self) -> f64 {
        let done = self.processed.load(Ordering::Relaxed) as f64;
        let progress = done / (self.total_work as f64 + 1.0);
        self.config.learning_rate * (1.0 - progress).max(LEARNING_RATE_FLOOR)
    }

    fn run(&self, sentences: &[Vec<u32>], rng: &mut ChaCha8Rng) -> EpochStats {
        let mut stats = EpochStats::default();
        let mut kept = Vec::new();
        let mut negs: Vec<usize> = Vec::with_capacity(self.config.negatives);
        let window = self.config.window;
        for sentence in sentences {
            let lr = self.learning_rate();
            self.processed.fetch_add(sentence.len() as u64, Ordering::Relaxed);
            kept.clear();
            for &w in sentence {
                let p = self.keep_prob[w as usize];
                if p >= 1.0 || rng.gen::<f64>() < p {
                    kept.push(w);
                }
            }
            for t in 0..kept.len() {
                let category = self.resolver.resolve(&kept, t, window);
                stats.resolved += category.is_some() as u64;
                let lo = t.saturating_sub(window);
                let hi = (t + window).min(kept.len() - 1);
                for c in lo..=hi {
                    if c == t {
                        continue;
                    }
                    let context = kept[c] as usize;
                    negs.clear();
                    for _ in 0..self.config.negatives {
                        let n = self.sampler.sample(rng) as usize;
                        if n != context {
                            negs.push(n);
                        }
                    }
                    stats.loss += self.step(kept[t] as usize, category, context, &negs, lr);
                    stats.pairs += 1;
                }
            }
        }
        stats
    }

    /// One SGD step on the pair loss; returns the loss before the update.
    fn step(&self, target: usize, category: Option<usize>, context: usize, negs: &[usize], lr: f64) -> f64 {
        let v = self.input.row(target);
        let u = self.output.row(context);
        let neg_rows: Vec<Vec<f64>> = negs.iter().map(|&n| self.output.row(n)).collect();
        let neg_refs: Vec<&[f64]> = neg_rows.iter().map(Vec::as_slice).collect();
        match category {
            None => {
                let g = pair_loss_grad(&v, &u, &neg_refs);
                self.input.add(target, &g.input, -lr);
                self.output.add(context, &g.positive, -lr);
                for (&n, d) in negs.iter().zip(&g.negatives) {
                    self.output.add(n, d, -lr);
                }
                g.loss
            }
            Some(cat) => {
                let vc = self.input.row(cat);
                let g = joint_loss_grad(&v, &vc, &u, &neg_refs);
                self.input.add(target, &g.word_input, -lr);
                self.input.add(cat, &g.category_input, -lr);
                self.output.add(context, &g.positive, -lr);
                for (&n, d) in negs.iter().zip(&g.negatives) {
                    self.output.add(n, d, -lr);
                }
                g.loss()
            }
        }
    }
}
