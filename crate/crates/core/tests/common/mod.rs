#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taxovec::corpus::{Document, Tokenizer};
use taxovec::sparse::SparseVector;
use taxovec::tfidf::Vocabulary;
use taxovec::{EmbeddingStore, Taxonomy};

pub const CENTROID: [(&str, f64); 4] = [("trump", 0.10), ("president", 0.44), ("prez", 0.05), ("government", 0.31)];
pub const DOC: [(&str, f64); 2] = [("trump", 0.67), ("prez", 0.51)];

pub fn toy_vectors() -> Vec<(&'static str, Vec<f64>)> {
    vec![
        ("trump", vec![0.0, 1.0]),
        ("president", vec![1.0, 0.0]),
        ("prez", vec![0.8, 0.6]),
        ("government", vec![-1.0, 0.0]),
    ]
}

pub fn toy_store() -> EmbeddingStore {
    let mut s = EmbeddingStore::new(2);
    for (w, v) in toy_vectors() {
        s.insert(w, &v).unwrap();
    }
    s
}

pub fn sparse(vocab: &Vocabulary, w: &[(&str, f64)]) -> SparseVector {
    SparseVector::from_entries(w.iter().map(|(t, x)| (vocab.id(t).unwrap(), *x))).unwrap()
}

/// Independent double-loop scorer over string-keyed weights.
pub mod oracle {
    use std::collections::HashMap;

    pub type Vectors = HashMap<String, Vec<f64>>;

    pub fn vectors(pairs: &[(&str, Vec<f64>)]) -> Vectors {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn cos(a: &[f64], b: &[f64]) -> f64 {
        let mut dot = 0.0;
        let mut na = 0.0;
        let mut nb = 0.0;
        for i in 0..a.len() {
            dot += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na.sqrt() * nb.sqrt())
        }
    }

    pub fn phi(vecs: &Vectors, a: &str, b: &str, theta: f64) -> f64 {
        if a == b {
            return 1.0;
        }
        match (vecs.get(a), vecs.get(b)) {
            (Some(x), Some(y)) => {
                let c = cos(x, y);
                if c > theta {
                    c
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    fn norm(w: &[(String, f64)]) -> f64 {
        w.iter().map(|(_, x)| x * x).sum::<f64>().sqrt()
    }

    /// `sum_j sum_k f(j, k) mu_j d_k / (|mu| |d|)` by explicit double loop.
    pub fn double_sum<F: Fn(&str, &str) -> f64>(mu: &[(String, f64)], d: &[(String, f64)], f: F) -> f64 {
        let denom = norm(mu) * norm(d);
        if denom == 0.0 {
            return 0.0;
        }
        let mut num = 0.0;
        for (wj, x) in mu {
            for (wk, y) in d {
                num += f(wj, wk) * x * y;
            }
        }
        num / denom
    }

    pub fn owned(w: &[(&str, f64)]) -> Vec<(String, f64)> {
        w.iter().map(|(k, x)| (k.to_string(), *x)).collect()
    }

    pub fn dirac(mu: &[(String, f64)], d: &[(String, f64)]) -> f64 {
        double_sum(mu, d, |a, b| if a == b { 1.0 } else { 0.0 })
    }

    pub fn word(mu: &[(String, f64)], d: &[(String, f64)], vecs: &Vectors, theta: f64) -> f64 {
        double_sum(mu, d, |a, b| phi(vecs, a, b, theta))
    }

    /// Both sides' real weights scaled to unit norm, then one pseudo entry
    /// of weight `alpha` appended per side. The whole augmented grid is
    /// scored with `phi`.
    #[allow(clippy::too_many_arguments)]
    pub fn category_word(
        mu: &[(String, f64)],
        d: &[(String, f64)],
        vecs: &Vectors,
        catvec: Option<&[f64]>,
        docvec: Option<&[f64]>,
        theta: f64,
        alpha: f64,
        pseudo_in_norm: bool,
    ) -> f64 {
        let mut vecs = vecs.clone();
        let augment = |w: &[(String, f64)], key: &str, v: Option<&[f64]>, vecs: &mut Vectors| {
            let n = norm(w);
            let mut out: Vec<(String, f64)> =
                if n > 0.0 { w.iter().map(|(k, x)| (k.clone(), x / n)).collect() } else { Vec::new() };
            if let Some(v) = v.filter(|v| v.iter().any(|x| *x != 0.0)) {
                vecs.insert(key.to_string(), v.to_vec());
                out.push((key.to_string(), alpha));
            }
            out
        };
        let a = augment(mu, "\u{0}category", catvec, &mut vecs);
        let b = augment(d, "\u{0}document", docvec, &mut vecs);
        let mut num = 0.0;
        for (wj, x) in &a {
            for (wk, y) in &b {
                num += phi(&vecs, wj, wk, theta) * x * y;
            }
        }
        let real = |w: &[(String, f64)]| if norm(w) > 0.0 { 1.0 } else { 0.0 };
        let denom = if pseudo_in_norm { norm(&a) * norm(&b) } else { real(mu) * real(d) };
        if denom == 0.0 {
            0.0
        } else {
            num / denom
        }
    }
}

pub fn sentences(lines: &[String]) -> Vec<Vec<String>> {
    lines.iter().map(|l| l.split_whitespace().map(String::from).collect()).collect()
}

/// 200 sentences where `cat` and `dog` share their contexts and `car`
/// appears only with road words.
pub fn pets_corpus(seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pet_verbs = ["chased", "ate", "licked", "sniffed"];
    let pet_objects = ["food", "ball", "toy", "bowl", "mouse"];
    let car_verbs = ["drove", "parked", "crashed", "stalled"];
    let car_objects = ["road", "highway", "garage", "street", "lane"];
    let lines: Vec<String> = (0..200)
        .map(|i| match i % 3 {
            0 | 1 => {
                let pet = if i % 3 == 0 { "cat" } else { "dog" };
                format!(
                    "the {pet} {} the {} near the {}",
                    pet_verbs[rng.gen_range(0..4)],
                    pet_objects[rng.gen_range(0..5)],
                    pet_objects[rng.gen_range(0..5)]
                )
            }
            _ => format!(
                "the car {} on the {} past the {}",
                car_verbs[rng.gen_range(0..4)],
                car_objects[rng.gen_range(0..5)],
                car_objects[rng.gen_range(0..5)]
            ),
        })
        .collect();
    sentences(&lines)
}

pub const CLUSTER_A: [&str; 5] = ["apple", "banana", "cherry", "grape", "melon"];
pub const CLUSTER_B: [&str; 5] = ["engine", "piston", "valve", "gear", "clutch"];

/// Sentences drawn from one of two disjoint word clusters.
pub fn two_cluster_corpus(seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..200)
        .map(|i| {
            let words = if i % 2 == 0 { &CLUSTER_A } else { &CLUSTER_B };
            (0..8).map(|_| words[rng.gen_range(0..5)].to_string()).collect()
        })
        .collect()
}

pub const SYNONYM_CATEGORIES: [&str; 6] = ["arts", "business", "health", "science", "sports", "travel"];
const TOPIC_TERMS: usize = 5;
const NOISE_TERMS: usize = 10;
const BLEND_TERMS: usize = 2;

pub fn topic_term(cat: usize, i: usize) -> String {
    format!("{}term{i}", SYNONYM_CATEGORIES[cat])
}

pub fn topic_synonym(cat: usize, i: usize) -> String {
    format!("{}alt{i}", SYNONYM_CATEGORIES[cat])
}

pub fn noise_term(i: usize) -> String {
    format!("common{i}")
}

pub fn topic_blend(cat: usize, i: usize) -> String {
    format!("{}mix{i}", SYNONYM_CATEGORIES[cat])
}

/// Six categories, 36 training and 24 test documents. Training documents
/// use their category's literal terms. Test documents mix in words never
/// seen in training: synonyms (0.9-similar to one term) and blends (near
/// the category's overall direction but below 0.6 against every single
/// term), plus literal terms of the next category as distractors. The
/// four test documents of a category lean progressively harder on the
/// unseen words.
pub struct SynonymFixture {
    pub taxonomy: Taxonomy,
    pub train: Vec<Document>,
    pub test: Vec<Document>,
    pub store: EmbeddingStore,
}

pub fn synonym_fixture(seed: u64) -> SynonymFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut paths = vec!["Top".to_string()];
    paths.extend(SYNONYM_CATEGORIES.iter().map(|c| format!("Top/{c}")));
    let taxonomy = Taxonomy::from_paths(&paths).unwrap();
    let tok = Tokenizer::default();
    let label = |c: usize| taxonomy.id_of(&format!("Top/{}", SYNONYM_CATEGORIES[c])).unwrap();

    let mut pick = |f: fn(usize, usize) -> String, c: usize, range: usize, n: usize| -> Vec<String> {
        (0..n).map(|_| f(c, rng.gen_range(0..range))).collect()
    };
    let noise = |_: usize, i: usize| noise_term(i);
    let mut train = Vec::new();
    for c in 0..6 {
        for j in 0..6 {
            let mut words = pick(topic_term, c, TOPIC_TERMS, 6);
            words.extend(pick(noise, 0, NOISE_TERMS, 3));
            train.push(Document::new(format!("train-{c}-{j}"), words.join(" "), &tok).with_label(label(c)));
        }
    }
    let mut test = Vec::new();
    for c in 0..6 {
        let next = (c + 1) % 6;
        for j in 0..4 {
            // (own literal, synonym, blend, distractor) token counts
            let (lit, syn, mix, dis) = [(2, 2, 0, 1), (0, 3, 0, 1), (0, 1, 2, 2), (0, 0, 2, 1)][j];
            let mut words = pick(topic_term, c, TOPIC_TERMS, lit);
            words.extend(pick(topic_synonym, c, TOPIC_TERMS, syn));
            words.extend(pick(topic_blend, c, BLEND_TERMS, mix));
            words.extend(pick(topic_term, next, TOPIC_TERMS, dis));
            words.extend(pick(noise, 0, NOISE_TERMS, 2));
            test.push(Document::new(format!("test-{c}-{j}"), words.join(" "), &tok).with_label(label(c)));
        }
    }

    let topics = 6 * TOPIC_TERMS;
    let dim = 2 * topics + NOISE_TERMS;
    let mut store = EmbeddingStore::new(dim);
    let unit = |axis: usize, w: f64| {
        let mut v = vec![0.0; dim];
        v[axis] = w;
        v
    };
    let off = (1.0f64 - 0.81).sqrt();
    for c in 0..6 {
        for i in 0..TOPIC_TERMS {
            let axis = c * TOPIC_TERMS + i;
            store.insert(topic_term(c, i), &unit(axis, 1.0)).unwrap();
            let mut syn = unit(axis, 0.9);
            syn[topics + axis] = off;
            store.insert(topic_synonym(c, i), &syn).unwrap();
        }
        for i in 0..BLEND_TERMS {
            let mut v = vec![0.0; dim];
            for t in 0..TOPIC_TERMS {
                v[c * TOPIC_TERMS + t] = 1.0;
            }
            v[c * TOPIC_TERMS + i] += 0.3;
            store.insert(topic_blend(c, i), &v).unwrap();
        }
    }
    for i in 0..NOISE_TERMS {
        store.insert(noise_term(i), &unit(2 * topics + i, 1.0)).unwrap();
    }
    SynonymFixture {
        taxonomy,
        train,
        test,
        store,
    }
}

pub fn word_counts(corpus: &[Vec<String>]) -> HashMap<String, usize> {
    let mut m = HashMap::new();
    for s in corpus {
        for w in s {
            *m.entry(w.clone()).or_insert(0) += 1;
        }
    }
    m
}
