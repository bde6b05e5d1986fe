//! End-to-end acceptance criteria. Each criterion runs in isolation and
//! prints one PASS/FAIL line; the test fails if any criterion does.

mod common;

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::oracle;
use taxovec::catvec::CategoryVectors;
use taxovec::category_embedding::{train_category_embedding, CandidateIndex};
use taxovec::corpus::Document;
use taxovec::dense::{cosine as dense_cosine, DenseVector};
use taxovec::embedding::sgns::{joint_loss_grad, pair_loss, pair_loss_grad};
use taxovec::embedding::{
    init_store, load_word2vec_text, read_word2vec_text, save_word2vec_text, train_skipgram, write_word2vec_text,
};
use taxovec::eval::{
    ablation_run, evaluate_macro, precision_at_k, AblationBundle, AblationTable, GainMap, Grade, RelevanceJudgments,
};
use taxovec::similarity::{
    sim_category_word, sim_dirac, sim_word, Measure, PseudoAugmented, SimilarityConfig, TermSpace,
};
use taxovec::sparse::SparseVector;
use taxovec::tfidf::Vocabulary;
use taxovec::{CentroidModel, EmbeddingStore, Taxonomy, TfIdfConfig, TfIdfModel, TrainConfig};

type Check = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, Duration, Check); 10] = [
        ("1 worked-example oracle", Duration::from_secs(1), worked_example_oracle),
        ("2 reduction chain", Duration::from_secs(5), reduction_chain),
        ("3 dominance", Duration::from_secs(10), dominance),
        ("4 gradient checks", Duration::from_secs(10), gradient_checks),
        ("5 degenerate-trainer equivalence", Duration::from_secs(30), degenerate_trainer_equivalence),
        ("6 embedding quality", Duration::from_secs(60), embedding_quality),
        ("7 direction of improvement", Duration::from_secs(30), direction_of_improvement),
        ("8 alpha sweep shape", Duration::from_secs(30), alpha_sweep_shape),
        ("9 evaluation arithmetic", Duration::from_secs(1), evaluation_arithmetic),
        ("10 determinism and round trips", Duration::from_secs(30), determinism_and_round_trips),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let took = start.elapsed();
        let result = result.and_then(|()| {
            ensure(took <= budget, || format!("took {took:.2?}, budget {budget:?}"))
        });
        match &result {
            Ok(()) => writeln!(out, "acceptance: PASS criterion {name} ({took:.2?})").unwrap(),
            Err(e) => {
                writeln!(out, "acceptance: FAIL criterion {name} ({took:.2?}): {e}").unwrap();
                failed.push(name);
            }
        }
    }
    let _ = panic::take_hook();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn worked_example_oracle() -> Result<(), String> {
    let vocab = Vocabulary::new(["government", "president", "prez", "trump"]);
    let store = common::toy_store();
    let mu = common::sparse(&vocab, &common::CENTROID);
    let d = common::sparse(&vocab, &common::DOC);
    let space = TermSpace::new(&vocab, &store);
    let vecs = oracle::vectors(&common::toy_vectors());
    let (om, od) = (oracle::owned(&common::CENTROID), oracle::owned(&common::DOC));

    let dirac = sim_dirac(&mu, &d);
    let word = sim_word(&mu, &d, &space, 0.6);
    let (odirac, oword) = (oracle::dirac(&om, &od), oracle::word(&om, &od, &vecs, 0.6));
    ensure((dirac - 0.1998).abs() < 1e-3, || format!("dirac {dirac}"))?;
    ensure((word - 0.5876).abs() < 1e-3, || format!("word {word}"))?;
    ensure((dirac - odirac).abs() < 1e-12, || format!("dirac {dirac} vs oracle {odirac}"))?;
    ensure((word - oword).abs() < 1e-12, || format!("word {word} vs oracle {oword}"))
}

fn random_instance(rng: &mut ChaCha8Rng, dim: usize) -> (Vocabulary, SparseVector, SparseVector, Vec<Vec<f64>>) {
    let n = rng.gen_range(1..=8);
    let vocab = Vocabulary::new((0..n).map(|i| format!("w{i}")));
    let draw = |rng: &mut ChaCha8Rng| {
        let mut entries = Vec::new();
        for i in 0..n as u32 {
            if rng.gen_bool(0.6) {
                entries.push((i, rng.gen_range(0.01..1.0)));
            }
        }
        SparseVector::from_entries(entries).unwrap()
    };
    let (mu, d) = (draw(rng), draw(rng));
    let vecs = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    (vocab, mu, d, vecs)
}

fn store_from(vocab: &Vocabulary, vecs: &[Vec<f64>]) -> EmbeddingStore {
    let mut s = EmbeddingStore::new(vecs[0].len());
    for (t, v) in vocab.terms().iter().zip(vecs) {
        s.insert(t.clone(), v).unwrap();
    }
    s
}

fn reduction_chain() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for case in 0..200 {
        let (vocab, mu, d, vecs) = random_instance(&mut rng, 4);

        // scaled basis vectors: every distinct pair is orthogonal
        let ortho: Vec<Vec<f64>> = (0..vocab.len())
            .map(|i| {
                let mut v = vec![0.0; vocab.len()];
                v[i] = rng.gen_range(0.5..2.0);
                v
            })
            .collect();
        let space = TermSpace::new(&vocab, &store_from(&vocab, &ortho));
        let theta = rng.gen_range(0.0..1.0);
        let (w, dc) = (sim_word(&mu, &d, &space, theta), sim_dirac(&mu, &d));
        ensure((w - dc).abs() < 1e-12, || format!("case {case}: orthogonal word {w} vs dirac {dc}"))?;

        let store = store_from(&vocab, &vecs);
        let space = TermSpace::new(&vocab, &store);
        let cv = DenseVector::from((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
        let dv = DenseVector::from((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
        let cfg = SimilarityConfig { theta, alpha: 0.0, ..SimilarityConfig::new(Measure::CategoryWordLevel) };
        let cw = sim_category_word(
            &PseudoAugmented::new(&mu, Some(&cv)),
            &PseudoAugmented::new(&d, Some(&dv)),
            &space,
            &cfg,
        );
        let w = sim_word(&mu, &d, &space, theta);
        ensure((cw - w).abs() < 1e-12, || format!("case {case}: alpha=0 {cw} vs word {w}"))?;

        let w1 = sim_word(&mu, &d, &space, 1.0);
        ensure(w1 == dc, || format!("case {case}: theta=1 {w1} vs dirac {dc}"))?;
    }
    Ok(())
}

fn dominance() -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases: 1000, ..Config::default() });
    let strategy = (1usize..=8, 1usize..=6, any::<u64>());
    runner
        .run(&strategy, |(n, dim, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vocab = Vocabulary::new((0..n).map(|i| format!("w{i}")));
            let mut draw = || {
                SparseVector::from_entries((0..n as u32).map(|i| (i, rng.gen_range(0.0..1.0)))).unwrap()
            };
            let (mu, d) = (draw(), draw());
            let vecs: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let theta = rng.gen_range(0.0..1.0);
            let space = TermSpace::new(&vocab, &store_from(&vocab, &vecs));
            let (w, dc) = (sim_word(&mu, &d, &space, theta), sim_dirac(&mu, &d));
            prop_assert!(w >= dc, "word {} < dirac {}", w, dc);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Central differences of `f` at `x` along every coordinate.
fn numeric_grad(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-5;
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += h;
            m[i] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

fn compare(what: &str, case: usize, analytic: &[f64], numeric: &[f64]) -> Result<(), String> {
    for (i, (a, n)) in analytic.iter().zip(numeric).enumerate() {
        let e = rel_err(*a, *n);
        ensure(e < 1e-4, || format!("case {case} {what}[{i}]: analytic {a} numeric {n} rel {e:e}"))?;
    }
    Ok(())
}

fn gradient_checks() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..100 {
        let dim = rng.gen_range(1..=8);
        let k = rng.gen_range(1..=5);
        let v = random_vec(&mut rng, dim);
        let c = random_vec(&mut rng, dim);
        let u = random_vec(&mut rng, dim);
        let negs: Vec<Vec<f64>> = (0..k).map(|_| random_vec(&mut rng, dim)).collect();

        let g = pair_loss_grad(&v, &u, &refs(&negs));
        compare("word input", case, &g.input, &numeric_grad(&v, |x| pair_loss(x, &u, &refs(&negs))))?;
        compare("context", case, &g.positive, &numeric_grad(&u, |x| pair_loss(&v, x, &refs(&negs))))?;
        for j in 0..k {
            let num = numeric_grad(&negs[j], |x| {
                let mut n = negs.clone();
                n[j] = x.to_vec();
                pair_loss(&v, &u, &refs(&n))
            });
            compare("negative", case, &g.negatives[j], &num)?;
        }

        let joint = |v: &[f64], c: &[f64], u: &[f64], n: &[Vec<f64>]| pair_loss(v, u, &refs(n)) + pair_loss(c, u, &refs(n));
        let jg = joint_loss_grad(&v, &c, &u, &refs(&negs));
        ensure(rel_err(jg.loss(), joint(&v, &c, &u, &negs)) < 1e-12, || format!("case {case}: joint loss"))?;
        compare("joint word input", case, &jg.word_input, &numeric_grad(&v, |x| joint(x, &c, &u, &negs)))?;
        compare("category input", case, &jg.category_input, &numeric_grad(&c, |x| joint(&v, x, &u, &negs)))?;
        compare("joint context", case, &jg.positive, &numeric_grad(&u, |x| joint(&v, &c, x, &negs)))?;
        for j in 0..k {
            let num = numeric_grad(&negs[j], |x| {
                let mut n = negs.clone();
                n[j] = x.to_vec();
                joint(&v, &c, &u, &n)
            });
            compare("joint negative", case, &jg.negatives[j], &num)?;
        }
    }
    Ok(())
}

fn refs(n: &[Vec<f64>]) -> Vec<&[f64]> {
    n.iter().map(Vec::as_slice).collect()
}

fn small_train_config() -> TrainConfig {
    TrainConfig {
        dim: 16,
        window: 2,
        negatives: 5,
        epochs: 5,
        subsample: 0.0,
        seed: 3,
        ..Default::default()
    }
}

fn degenerate_trainer_equivalence() -> Result<(), String> {
    let corpus = common::pets_corpus(1);
    let cfg = small_train_config();
    let (plain, plain_report) = train_skipgram(&corpus, &cfg).map_err(|e| e.to_string())?;

    // any model and vectorizer: the empty index never consults them
    let tax = Taxonomy::from_paths(["Top"]).unwrap();
    let tfidf = TfIdfModel::fit_tokens(corpus.iter().map(Vec::as_slice), TfIdfConfig::default()).unwrap();
    let model = CentroidModel::from_centroids(&tax, vec![SparseVector::new()]).unwrap();
    let start = init_store(&corpus, &cfg).unwrap();
    let (joint, joint_report) =
        train_category_embedding(&corpus, &CandidateIndex::empty(), &model, &tfidf, &start, &cfg)
            .map_err(|e| e.to_string())?;
    ensure(plain_report == joint_report, || "reports differ".into())?;
    ensure(plain.keys() == joint.keys(), || "keys differ".into())?;
    for (k, v) in plain.iter() {
        let w = joint.get(k).unwrap();
        ensure(v.iter().zip(w).all(|(a, b)| a.to_bits() == b.to_bits()), || format!("vector of `{k}` differs"))?;
    }
    for k in plain.keys() {
        let (a, b) = (plain.get_output(k).unwrap(), joint.get_output(k).unwrap());
        ensure(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()), || format!("output of `{k}` differs"))?;
    }
    Ok(())
}

fn embedding_quality() -> Result<(), String> {
    let corpus = common::two_cluster_corpus(9);
    let cfg = TrainConfig { dim: 20, window: 3, epochs: 10, ..small_train_config() };
    let (store, _) = train_skipgram(&corpus, &cfg).map_err(|e| e.to_string())?;
    let cos = |a: &str, b: &str| dense_cosine(store.get(a).unwrap(), store.get(b).unwrap());
    let mut intra = Vec::new();
    let mut inter = Vec::new();
    for cluster in [&common::CLUSTER_A, &common::CLUSTER_B] {
        for (i, a) in cluster.iter().enumerate() {
            for b in &cluster[i + 1..] {
                intra.push(cos(a, b));
            }
        }
    }
    for a in &common::CLUSTER_A {
        for b in &common::CLUSTER_B {
            inter.push(cos(a, b));
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mi, mx) = (mean(&intra), mean(&inter));
    ensure(mi - mx >= 0.1, || format!("intra {mi:.3} inter {mx:.3}"))
}

const FIXTURE_SEED: u64 = 17;

fn synonym_table(configs: &[SimilarityConfig]) -> AblationTable {
    let fx = common::synonym_fixture(FIXTURE_SEED);
    let all: Vec<Document> = fx.train.iter().chain(&fx.test).cloned().collect();
    let tfidf = TfIdfModel::fit(&all, TfIdfConfig::default()).unwrap();
    let centroids = CentroidModel::build(&fx.taxonomy, &fx.train, &tfidf);
    let catvecs = CategoryVectors::generate(&centroids, tfidf.vocab(), &fx.store);
    let bundle = AblationBundle {
        centroids: &centroids,
        tfidf: &tfidf,
        store: Some(&fx.store),
        catvecs: Some(&catvecs),
        docs: &fx.test,
        judgments: None,
        ks: Vec::new(),
        gains: GainMap::default(),
    };
    ablation_run(&bundle, configs).unwrap()
}

fn direction_of_improvement() -> Result<(), String> {
    let table = synonym_table(&[
        SimilarityConfig::new(Measure::DiracCos),
        SimilarityConfig::new(Measure::WordLevel),
        SimilarityConfig::new(Measure::CategoryWordLevel),
    ]);
    let f1: Vec<f64> = table.rows.iter().map(|r| r.report.macro_f1).collect();
    ensure(f1[0] < f1[1] && f1[1] <= f1[2], || format!("macro F1 dirac/word/catword = {f1:?}\n{}", table.to_table()))
}

fn alpha_sweep_shape() -> Result<(), String> {
    let alphas = [0.0, 0.3, 0.6, 0.9, 1.0];
    let configs: Vec<SimilarityConfig> = alphas
        .iter()
        .map(|&alpha| SimilarityConfig { alpha, ..SimilarityConfig::new(Measure::CategoryWordLevel) })
        .collect();
    let table = synonym_table(&configs);
    let f1: Vec<f64> = table.rows.iter().map(|r| r.report.macro_f1).collect();
    let best_below_one = f1[..4].iter().copied().fold(f64::MIN, f64::max);
    ensure(f1[4] <= best_below_one + 1e-9, || format!("alpha sweep F1 {f1:?}"))
}

fn evaluation_arithmetic() -> Result<(), String> {
    let map = |pairs: &[(&str, &str)]| pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let gold = map(&[("1", "A"), ("2", "B"), ("3", "C")]);
    let r = evaluate_macro(&gold, &gold).map_err(|e| e.to_string())?;
    ensure(r.macro_precision == 1.0 && r.macro_recall == 1.0 && r.macro_f1 == 1.0, || "perfect".into())?;

    let gold = map(&[("1", "A"), ("2", "A"), ("3", "B")]);
    let r = evaluate_macro(&map(&[("1", "A"), ("2", "B"), ("3", "B")]), &gold).map_err(|e| e.to_string())?;
    ensure(r.macro_precision == 0.75 && r.macro_recall == 0.75, || format!("{r:?}"))?;
    ensure((r.macro_f1 - 2.0 / 3.0).abs() < 1e-15, || format!("macro f1 {}", r.macro_f1))?;

    let r = evaluate_macro(&map(&[("1", "B"), ("2", "B"), ("3", "A")]), &gold).map_err(|e| e.to_string())?;
    ensure(r.macro_f1 == 0.0, || format!("all wrong {}", r.macro_f1))?;

    let mut j = RelevanceJudgments::new();
    j.insert("d", "A", Grade::Relevant);
    j.insert("d", "B", Grade::Not);
    j.insert("d", "C", Grade::Relevant);
    j.insert("e", "A", Grade::Relevant);
    j.insert("e", "B", Grade::Somewhat);
    j.insert("e", "C", Grade::Not);
    let one = |doc: &str| -> std::collections::BTreeMap<String, Vec<String>> {
        [(doc.to_string(), vec!["A".to_string(), "B".into(), "C".into()])].into()
    };
    let p = precision_at_k(&one("d"), &j, &[3], &GainMap::binary());
    ensure((p.values[&3] - 2.0 / 3.0).abs() < 1e-15, || format!("binary P@3 {}", p.values[&3]))?;
    let p = precision_at_k(&one("e"), &j, &[3], &GainMap::default());
    ensure(p.values[&3] == 0.5, || format!("graded P@3 {}", p.values[&3]))?;
    let mut all = RelevanceJudgments::new();
    for c in ["A", "B", "C"] {
        all.insert("d", c, Grade::Relevant);
    }
    let p = precision_at_k(&one("d"), &all, &[1, 2, 3], &GainMap::default());
    ensure(p.values.values().all(|&x| x == 1.0), || format!("all relevant {:?}", p.values))
}

fn determinism_and_round_trips() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fx = common::synonym_fixture(FIXTURE_SEED);

    let text = fx.taxonomy.to_text();
    ensure(Taxonomy::parse(&text).unwrap().to_text() == text, || "taxonomy text round trip".into())?;

    let tfidf = TfIdfModel::fit(&fx.train, TfIdfConfig::default()).unwrap();
    let tpath = dir.path().join("tfidf.json");
    tfidf.save(&tpath).unwrap();
    ensure(TfIdfModel::load(&tpath).unwrap() == tfidf, || "tf-idf round trip".into())?;

    let centroids = CentroidModel::build(&fx.taxonomy, &fx.train, &tfidf)
        .merge_descendants(&fx.taxonomy, 0.5)
        .unwrap();
    let cpath = dir.path().join("centroids.jsonl");
    centroids.save(&cpath, tfidf.vocab()).unwrap();
    let back = CentroidModel::load(&cpath, &fx.taxonomy, tfidf.vocab()).unwrap();
    ensure(back.len() == centroids.len(), || "centroid count".into())?;
    for i in 0..centroids.len() {
        let id = taxovec::CategoryId(i as u32);
        ensure(back.centroid(id) == centroids.centroid(id), || format!("centroid {} differs", centroids.path(id)))?;
    }

    let corpus = common::pets_corpus(2);
    let cfg = small_train_config();
    let (a, _) = train_skipgram(&corpus, &cfg).unwrap();
    let (b, _) = train_skipgram(&corpus, &cfg).unwrap();
    let (mut ta, mut tb) = (Vec::new(), Vec::new());
    write_word2vec_text(&mut ta, &a).unwrap();
    write_word2vec_text(&mut tb, &b).unwrap();
    ensure(ta == tb, || "seeded runs differ".into())?;

    let spath = dir.path().join("vectors.txt");
    save_word2vec_text(&spath, &a).unwrap();
    let loaded = load_word2vec_text(&spath).unwrap();
    ensure(loaded.keys() == a.keys(), || "store keys".into())?;
    for (k, v) in a.iter() {
        let w = loaded.get(k).unwrap();
        ensure(v.iter().zip(w).all(|(x, y)| (x - y).abs() <= 5e-7), || format!("vector of `{k}`"))?;
    }
    let reparsed = read_word2vec_text(&ta[..]).unwrap();
    let mut again = Vec::new();
    write_word2vec_text(&mut again, &reparsed).unwrap();
    ensure(again == ta, || "text format is not a fixed point".into())
}
