use std::sync::atomic::{AtomicU64, Ordering};

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::hs::{hs_log_prob, infer_step, train_step, SharedMatrix};
use super::huffman::HuffmanTree;
use crate::corpus::{FunctionSequence, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub alpha0: f32,
    pub alpha_min: f32,
    pub seed: u64,
    /// Epochs of SGD when inferring a vector for an unseen sequence.
    pub infer_steps: usize,
    /// Training threads. Results are bit-reproducible only with 1.
    pub workers: usize,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            dim: 300,
            window: 15,
            min_count: 20,
            epochs: 20,
            alpha0: 0.025,
            alpha_min: 1e-4,
            seed: 1,
            infer_steps: 50,
            workers: 1,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= self.alpha0) {
            return Err(Error::Config(format!(
                "learning rates must satisfy 0 < alpha_min <= alpha0, got {} and {}",
                self.alpha_min, self.alpha0
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Linear learning-rate decay from `alpha0` to `alpha_min` over `total` steps.
#[derive(Debug, Clone, Copy)]
struct Schedule {
    alpha0: f32,
    alpha_min: f32,
    total: u64,
}

impl Schedule {
    fn at(&self, step: u64) -> f32 {
        if self.total == 0 {
            return self.alpha0;
        }
        let frac = (step as f64 / self.total as f64).min(1.0);
        let a = self.alpha0 as f64 - (self.alpha0 - self.alpha_min) as f64 * frac;
        (a as f32).max(self.alpha_min)
    }
}

/// A training document: its source and vocabulary ids, method name first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Doc {
    pub source_id: String,
    pub ids: Vec<u32>,
}

/// Result of [`PvModel::infer_ids`].
#[derive(Debug, Clone, PartialEq)]
pub struct Inferred {
    pub vector: Vec<f32>,
    /// Every token was out of vocabulary; `vector` is all zeros.
    pub all_dropped: bool,
}

/// PV-DBOW paragraph vectors trained with hierarchical softmax.
#[derive(Debug, Clone)]
pub struct PvModel {
    pub(crate) hyper: HyperParams,
    pub(crate) vocab: Vocabulary,
    pub(crate) tree: HuffmanTree,
    pub(crate) docs: Vec<Doc>,
    pub(crate) doc_vectors: Vec<f32>,
    pub(crate) node_vectors: Vec<f32>,
    pub(crate) norms: Vec<f64>,
}

pub(super) fn fnv1a(ids: &[u32]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for id in ids {
        for b in id.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

pub(super) fn random_init(rng: &mut ChaCha8Rng, out: &mut [f32]) {
    let dim = out.len() as f32;
    for x in out {
        *x = (rng.random::<f32>() - 0.5) / dim;
    }
}

fn window_range(i: usize, len: usize, window: usize) -> std::ops::RangeInclusive<usize> {
    i.saturating_sub(window)..=(i + window).min(len - 1)
}

fn strip_unknown(ids: &[u32]) -> Vec<u32> {
    ids.iter().copied().filter(|&id| id != Vocabulary::UNK_ID).collect()
}

impl PvModel {
    /// Build a vocabulary with `hyper.min_count` and train on `sequences`.
    pub fn train(sequences: &[FunctionSequence], hyper: &HyperParams) -> Result<Self> {
        let mode = sequences.first().ok_or(Error::Empty("training sequences"))?.mode;
        let vocab = Vocabulary::build(sequences, hyper.min_count, mode)?;
        Ok(Self::train_with_vocab(sequences, vocab, hyper, false)?.0)
    }

    /// Train with a prebuilt vocabulary. With `trace`, also returns the mean
    /// negative log-likelihood of the windowed objective after each epoch.
    pub fn train_with_vocab(
        sequences: &[FunctionSequence],
        vocab: Vocabulary,
        hyper: &HyperParams,
        trace: bool,
    ) -> Result<(Self, Vec<f64>)> {
        hyper.validate()?;
        if sequences.is_empty() {
            return Err(Error::Empty("training sequences"));
        }
        let tree = HuffmanTree::build(vocab.freqs())?;
        let dim = hyper.dim;
        let docs: Vec<Doc> = sequences
            .iter()
            .map(|s| Doc {
                source_id: s.source_id.clone(),
                ids: vocab.encode_sequence(s),
            })
            .collect();
        let train_ids: Vec<Vec<u32>> = docs.iter().map(|d| strip_unknown(&d.ids)).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let mut init = vec![0f32; docs.len() * dim];
        for row in init.chunks_mut(dim) {
            random_init(&mut rng, row);
        }
        let doc_m = SharedMatrix::from_vec(init, dim);
        let node_m = SharedMatrix::from_vec(vec![0f32; tree.num_internal() * dim], dim);

        let positions: u64 = train_ids.iter().map(|d| d.len() as u64).sum();
        let sched = Schedule {
            alpha0: hyper.alpha0,
            alpha_min: hyper.alpha_min,
            total: positions * hyper.epochs as u64,
        };
        let processed = AtomicU64::new(0);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(hyper.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut losses = Vec::new();
        for _ in 0..hyper.epochs {
            let run = |d: usize| {
                train_doc(
                    &tree,
                    &node_m,
                    &doc_m,
                    d,
                    &train_ids[d],
                    hyper.window,
                    sched,
                    &processed,
                )
            };
            if hyper.workers == 1 {
                (0..docs.len()).for_each(run);
            } else {
                pool.install(|| (0..docs.len()).into_par_iter().for_each(run));
            }
            if trace {
                losses.push(objective(&tree, &doc_m, &node_m, &train_ids, dim, hyper.window));
            }
        }

        let mut model = Self {
            hyper: hyper.clone(),
            vocab,
            tree,
            docs,
            doc_vectors: doc_m.into_vec(),
            node_vectors: node_m.into_vec(),
            norms: Vec::new(),
        };
        model.refresh_norms();
        Ok((model, losses))
    }

    pub(crate) fn refresh_norms(&mut self) {
        let dim = self.hyper.dim;
        self.norms = self
            .doc_vectors
            .chunks(dim)
            .map(|r| r.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt())
            .collect();
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn dim(&self) -> usize {
        self.hyper.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn tree(&self) -> &HuffmanTree {
        &self.tree
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn doc(&self, id: usize) -> &Doc {
        &self.docs[id]
    }

    pub fn docs(&self) -> &[Doc] {
        &self.docs
    }

    pub fn doc_vector(&self, id: usize) -> &[f32] {
        &self.doc_vectors[id * self.hyper.dim..(id + 1) * self.hyper.dim]
    }

    pub fn doc_vectors(&self) -> &[f32] {
        &self.doc_vectors
    }

    pub fn node_vectors(&self) -> &[f32] {
        &self.node_vectors
    }

    /// `log P(word | vector)` under the trained tree.
    pub fn log_prob(&self, vector: &[f32], word: u32) -> f64 {
        hs_log_prob(&self.tree, &self.node_vectors, self.hyper.dim, vector, word)
    }

    /// Infer a vector for a token list. Tokens outside the vocabulary are
    /// dropped.
    pub fn infer_vector(&self, tokens: &[&str], steps: usize) -> Inferred {
        let ids: Vec<u32> = tokens.iter().filter_map(|t| self.vocab.known_id(t)).collect();
        self.infer_ids(&ids, steps)
    }

    /// Infer a vector for vocabulary ids with the node vectors frozen.
    /// Unknown ids are dropped.
    pub fn infer_ids(&self, ids: &[u32], steps: usize) -> Inferred {
        let dim = self.hyper.dim;
        let ids = strip_unknown(ids);
        if ids.is_empty() {
            debug!("all context tokens are out of vocabulary; returning a zero vector");
            return Inferred {
                vector: vec![0.0; dim],
                all_dropped: true,
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.hyper.seed ^ fnv1a(&ids));
        let mut v = vec![0f32; dim];
        random_init(&mut rng, &mut v);
        let sched = Schedule {
            alpha0: self.hyper.alpha0,
            alpha_min: self.hyper.alpha_min,
            total: (ids.len() * steps) as u64,
        };
        let mut neu1e = vec![0f32; dim];
        let mut step = 0u64;
        for _ in 0..steps {
            for i in 0..ids.len() {
                let alpha = sched.at(step);
                step += 1;
                for j in window_range(i, ids.len(), self.hyper.window) {
                    neu1e.iter_mut().for_each(|e| *e = 0.0);
                    infer_step(&self.tree, &self.node_vectors, dim, &v, ids[j], alpha, &mut neu1e);
                    v.iter_mut().zip(&neu1e).for_each(|(x, e)| *x += e);
                }
            }
        }
        Inferred {
            vector: v,
            all_dropped: false,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn train_doc(
    tree: &HuffmanTree,
    nodes: &SharedMatrix,
    docs: &SharedMatrix,
    d: usize,
    ids: &[u32],
    window: usize,
    sched: Schedule,
    processed: &AtomicU64,
) {
    if ids.is_empty() {
        return;
    }
    let dim = docs.dim();
    let mut v = vec![0f32; dim];
    let mut neu1e = vec![0f32; dim];
    let mut scratch = vec![0f32; dim];
    docs.load_row(d, &mut v);
    for i in 0..ids.len() {
        let alpha = sched.at(processed.fetch_add(1, Ordering::Relaxed));
        for j in window_range(i, ids.len(), window) {
            neu1e.iter_mut().for_each(|e| *e = 0.0);
            train_step(tree, nodes, &v, ids[j], alpha, &mut neu1e, &mut scratch);
            v.iter_mut().zip(&neu1e).for_each(|(x, e)| *x += e);
        }
    }
    docs.store_row(d, &v);
}

/// Mean `-log P(target | doc)` over every (doc, position, window target).
fn objective(
    tree: &HuffmanTree,
    docs: &SharedMatrix,
    nodes: &SharedMatrix,
    ids: &[Vec<u32>],
    dim: usize,
    window: usize,
) -> f64 {
    let mut flat_nodes = vec![0f32; tree.num_internal() * dim];
    for (r, row) in flat_nodes.chunks_mut(dim).enumerate() {
        nodes.load_row(r, row);
    }
    let mut v = vec![0f32; dim];
    let mut total = 0.0;
    let mut n = 0u64;
    for (d, doc) in ids.iter().enumerate() {
        docs.load_row(d, &mut v);
        for i in 0..doc.len() {
            for j in window_range(i, doc.len(), window) {
                total -= hs_log_prob(tree, &flat_nodes, dim, &v, doc[j]);
                n += 1;
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}
