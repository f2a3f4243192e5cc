use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pv::{fnv1a, random_init};
use super::*;
use crate::corpus::{FunctionSequence, TokenMode, Vocabulary};
use crate::error::Error;

fn seq(src: &str, tokens: &[&str]) -> FunctionSequence {
    FunctionSequence::new(src, tokens[0], tokens[1..].iter().map(|s| s.to_string()).collect())
}

fn hyper(dim: usize, epochs: usize) -> HyperParams {
    HyperParams {
        dim,
        epochs,
        min_count: 1,
        ..HyperParams::default()
    }
}

/// Documents drawn from a handful of fixed token groups, with some noise.
fn grouped_corpus(n: usize, seed: u64) -> Vec<FunctionSequence> {
    let groups: Vec<Vec<String>> = (0..8).map(|g| (0..6).map(|t| format!("g{g}t{t}")).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let g = &groups[rng.random_range(0..groups.len())];
            let mut calls: Vec<String> = g.iter().filter(|_| rng.random::<f64>() > 0.15).cloned().collect();
            if calls.is_empty() {
                calls.push(g[0].clone());
            }
            FunctionSequence::new(format!("p/F{i}.java"), format!("m{}", i % 5), calls)
        })
        .collect()
}

fn train(seqs: &[FunctionSequence], h: &HyperParams) -> PvModel {
    PvModel::train(seqs, h).unwrap()
}

#[test]
fn duplicate_documents_converge() {
    let toks: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
    let refs: Vec<&str> = toks.iter().map(String::as_str).collect();
    let seqs = vec![seq("p/A.java", &refs), seq("p/B.java", &refs)];
    let m = train(&seqs, &hyper(16, 50));
    let c = cosine(m.doc_vector(0), m.doc_vector(1));
    assert!(c >= 0.9, "cosine {c}");
}

#[test]
fn single_document_loss_does_not_increase() {
    let seqs = vec![seq(
        "p/A.java",
        &["run", "open", "read", "read", "close", "log", "open"],
    )];
    let vocab = Vocabulary::build(&seqs, 1, TokenMode::FullNames).unwrap();
    let (_, trace) = PvModel::train_with_vocab(&seqs, vocab, &hyper(16, 30), true).unwrap();
    assert_eq!(trace.len(), 30);
    for w in trace.windows(2) {
        assert!(w[1] <= w[0] + 0.01, "{trace:?}");
    }
    assert!(trace.last().unwrap() < &trace[0]);
}

#[test]
fn zero_epochs_keep_initialisation() {
    let seqs = grouped_corpus(20, 3);
    let h = hyper(12, 0);
    let m = train(&seqs, &h);
    let mut rng = ChaCha8Rng::seed_from_u64(h.seed);
    let mut expected = vec![0f32; 20 * 12];
    for row in expected.chunks_mut(12) {
        for x in row {
            *x = (rng.random::<f32>() - 0.5) / 12.0;
        }
    }
    assert_eq!(m.doc_vectors(), &expected[..]);
    assert!(m.node_vectors().iter().all(|&x| x == 0.0));
}

#[test]
fn empty_corpus_is_an_error() {
    assert!(matches!(PvModel::train(&[], &hyper(8, 1)), Err(Error::Empty(_))));
}

#[test]
fn bad_hyper_parameters_are_rejected() {
    let seqs = grouped_corpus(5, 1);
    for h in [
        HyperParams { dim: 0, ..hyper(8, 1) },
        HyperParams {
            window: 0,
            ..hyper(8, 1)
        },
        HyperParams {
            alpha_min: 0.5,
            ..hyper(8, 1)
        },
        HyperParams {
            workers: 0,
            ..hyper(8, 1)
        },
    ] {
        assert!(matches!(PvModel::train(&seqs, &h), Err(Error::Config(_))));
    }
}

#[test]
fn inference_edge_cases() {
    let seqs = grouped_corpus(30, 4);
    let m = train(&seqs, &hyper(16, 5));
    let empty = m.infer_vector(&[], 50);
    assert!(empty.all_dropped);
    assert!(empty.vector.iter().all(|&x| x == 0.0));
    let oov = m.infer_vector(&["nothing", "here"], 50);
    assert!(oov.all_dropped);

    let tokens = ["g1t0", "missing", "g1t2"];
    let zero = m.infer_vector(&tokens, 0);
    assert!(!zero.all_dropped);
    let ids = [m.vocab().id("g1t0"), m.vocab().id("g1t2")];
    let mut rng = ChaCha8Rng::seed_from_u64(m.hyper().seed ^ fnv1a(&ids));
    let mut expected = vec![0f32; 16];
    random_init(&mut rng, &mut expected);
    assert_eq!(zero.vector, expected);

    assert_eq!(m.infer_vector(&tokens, 20), m.infer_vector(&tokens, 20));
}

#[test]
fn self_inference_is_consistent() {
    let seqs = grouped_corpus(300, 5);
    let h = HyperParams {
        dim: 32,
        epochs: 20,
        min_count: 1,
        ..HyperParams::default()
    };
    let m = train(&seqs, &h);
    let mut cos: Vec<f64> = (0..100)
        .map(|d| {
            let inferred = m.infer_ids(&m.doc(d).ids, h.infer_steps);
            cosine(&inferred.vector, m.doc_vector(d))
        })
        .collect();
    cos.sort_by(f64::total_cmp);
    let median = cos[50];
    assert!(median >= 0.7, "median {median}");
}

#[test]
fn most_similar_finds_itself() {
    let seqs = grouped_corpus(40, 6);
    let m = train(&seqs, &hyper(16, 5));
    for i in [0usize, 7, 39] {
        let hits = m.most_similar(m.doc_vector(i), 3).unwrap();
        assert_eq!(hits[0].doc_id, i);
        assert!((hits[0].score - 1.0).abs() < 1e-6);
    }
    assert_eq!(m.most_similar(m.doc_vector(0), 1000).unwrap().len(), 40);
}

#[test]
fn most_similar_errors() {
    let seqs = grouped_corpus(10, 6);
    let m = train(&seqs, &hyper(8, 1));
    assert!(matches!(m.most_similar(&[0.0; 8], 3), Err(Error::ZeroNormQuery)));
    assert!(matches!(
        m.most_similar(&[1.0; 4], 3),
        Err(Error::Dimension { expected: 8, found: 4 })
    ));
    assert!(m.most_similar(&[1.0; 8], 0).is_err());
}

fn brute_force(m: &PvModel, q: &[f32], k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = (0..m.num_docs()).map(|d| (d, cosine(q, m.doc_vector(d)))).collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

#[test]
fn most_similar_matches_brute_force() {
    let seqs = grouped_corpus(120, 8);
    let m = train(&seqs, &hyper(16, 3));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let q: Vec<f32> = (0..16).map(|_| rng.random::<f32>() - 0.5).collect();
        let k = rng.random_range(1..130);
        let got: Vec<(usize, f64)> = m
            .most_similar(&q, k)
            .unwrap()
            .iter()
            .map(|h| (h.doc_id, h.score))
            .collect();
        let want = brute_force(&m, &q, k);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.0, w.0);
            assert!((g.1 - w.1).abs() < 1e-12);
        }
    }
}

#[test]
fn ties_break_by_doc_id() {
    let toks = ["m", "a", "b"];
    let seqs = vec![seq("p/A.java", &toks), seq("p/B.java", &["n", "c"])];
    let mut m = train(&seqs, &hyper(4, 0));
    m.doc_vectors = vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0];
    m.refresh_norms();
    let hits = m.most_similar(&[3.0, 0.0, 0.0, 0.0], 2).unwrap();
    assert_eq!(hits.iter().map(|h| h.doc_id).collect::<Vec<_>>(), vec![0, 1]);
}

#[test]
fn serialization_is_deterministic_and_round_trips() {
    let seqs = grouped_corpus(50, 10);
    let h = hyper(16, 3);
    let a = train(&seqs, &h);
    let b = train(&seqs, &h);
    assert_eq!(a.to_bytes(), b.to_bytes());
    let back = PvModel::read_from(&mut a.to_bytes().as_slice()).unwrap();
    assert_eq!(back.to_bytes(), a.to_bytes());
    assert_eq!(back.docs(), a.docs());
    let q = a.doc_vector(3);
    assert_eq!(back.most_similar(q, 5).unwrap(), a.most_similar(q, 5).unwrap());
}

#[test]
fn corrupt_files_are_rejected() {
    let seqs = grouped_corpus(10, 11);
    let bytes = train(&seqs, &hyper(8, 1)).to_bytes();
    assert!(PvModel::read_from(&mut &bytes[..bytes.len() - 4]).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(PvModel::read_from(&mut bad.as_slice()), Err(Error::Format(_))));
}

#[test]
fn multiple_workers_train() {
    let seqs = grouped_corpus(200, 12);
    let h = HyperParams {
        workers: 4,
        ..hyper(16, 5)
    };
    let m = train(&seqs, &h);
    assert!(m.doc_vectors().iter().all(|x| x.is_finite()));
    assert_eq!(m.num_docs(), 200);
}

#[test]
fn gradient_check_on_trained_model() {
    let seqs = grouped_corpus(30, 13);
    let m = train(&seqs, &hyper(8, 5));
    for w in 1..m.vocab().len() as u32 {
        assert!(m.gradient_check(0, w) <= 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cosine_symmetric_and_scale_invariant(
        a in prop::collection::vec(-10.0f32..10.0, 6),
        b in prop::collection::vec(-10.0f32..10.0, 6),
        s in 0.01f32..100.0,
    ) {
        let scaled: Vec<f32> = a.iter().map(|x| x * s).collect();
        prop_assert_eq!(cosine(&a, &b), cosine(&b, &a));
        prop_assert!((cosine(&scaled, &b) - cosine(&a, &b)).abs() < 1e-5);
        let c = cosine(&a, &b);
        prop_assert!((-1.0..=1.0).contains(&c));
    }

    #[test]
    fn most_similar_invariant_under_rescaling(
        q in prop::collection::vec(-1.0f32..1.0, 8),
        s in 0.1f32..10.0,
    ) {
        prop_assume!(q.iter().any(|&x| x.abs() > 1e-3));
        let m = model_for_props();
        let scaled: Vec<f32> = q.iter().map(|x| x * s).collect();
        let a: Vec<usize> = m.most_similar(&q, 10).unwrap().iter().map(|h| h.doc_id).collect();
        let b: Vec<usize> = m.most_similar(&scaled, 10).unwrap().iter().map(|h| h.doc_id).collect();
        prop_assert_eq!(a, b);
    }
}

fn model_for_props() -> &'static PvModel {
    use std::sync::OnceLock;
    static M: OnceLock<PvModel> = OnceLock::new();
    M.get_or_init(|| train(&grouped_corpus(60, 14), &hyper(8, 3)))
}
