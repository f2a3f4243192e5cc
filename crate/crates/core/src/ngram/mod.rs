//! Order-n Markov language model over function tokens.
//!
//! Sequences are padded on the left with `order - 1` begin-of-sequence
//! markers so the method name is predicted from context like any other
//! token. The marker is a context symbol only; it is never a prediction
//! target and is not part of the vocabulary.

mod cache;
mod io;
mod trie;

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

pub use cache::{CacheScope, CacheState, DEFAULT_CAPACITY, DEFAULT_GAMMA};
pub use trie::CountTrie;

use crate::corpus::{FunctionSequence, Vocabulary};
use crate::error::{Error, Result};

/// Begin-of-sequence padding symbol.
pub const BOS: u32 = u32::MAX;

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 10;
pub const DEFAULT_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingKind {
    /// Raw relative frequencies; an unseen full context yields 1/|V|.
    Mle,
    /// Fixed-weight recursive interpolation grounded at 1/|V|.
    JelinekMercer,
    /// Interpolated Kneser-Ney with one absolute discount.
    KneserNey,
}

impl SmoothingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SmoothingKind::Mle => "mle",
            SmoothingKind::JelinekMercer => "jelinek_mercer",
            SmoothingKind::KneserNey => "kneser_ney",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mle" => Some(Self::Mle),
            "jm" | "jelinek_mercer" => Some(Self::JelinekMercer),
            "kn" | "kneser_ney" => Some(Self::KneserNey),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConfig {
    pub kind: SmoothingKind,
    pub lambda: f64,
    pub discount: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            kind: SmoothingKind::JelinekMercer,
            lambda: 0.5,
            discount: 0.75,
        }
    }
}

impl SmoothingConfig {
    pub fn mle() -> Self {
        Self {
            kind: SmoothingKind::Mle,
            ..Self::default()
        }
    }

    pub fn jelinek_mercer(lambda: f64) -> Self {
        Self {
            kind: SmoothingKind::JelinekMercer,
            lambda,
            ..Self::default()
        }
    }

    pub fn kneser_ney(discount: f64) -> Self {
        Self {
            kind: SmoothingKind::KneserNey,
            discount,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inside = |x: f64| x > 0.0 && x < 1.0;
        match self.kind {
            SmoothingKind::JelinekMercer if !inside(self.lambda) => {
                Err(Error::Config(format!("lambda must lie in (0,1), got {}", self.lambda)))
            }
            SmoothingKind::KneserNey if !inside(self.discount) => Err(Error::Config(format!(
                "discount must lie in (0,1), got {}",
                self.discount
            ))),
            _ => Ok(()),
        }
    }
}

/// A trained, immutable n-gram model.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    vocab: Vocabulary,
    smoothing: SmoothingConfig,
    trie: CountTrie,
}

fn check_order(order: usize) -> Result<()> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(Error::Config(format!(
            "n-gram order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order}"
        )));
    }
    Ok(())
}

impl NGramModel {
    /// Count every n-gram of length 1..=order in `sequences`.
    pub fn train(
        sequences: &[FunctionSequence],
        order: usize,
        vocab: Vocabulary,
        smoothing: SmoothingConfig,
    ) -> Result<Self> {
        let encoded: Vec<Vec<u32>> = sequences.iter().map(|s| vocab.encode_sequence(s)).collect();
        Self::train_ids(&encoded, order, vocab, smoothing)
    }

    /// Train from sequences already encoded against `vocab`.
    ///
    /// Counting runs over rayon shards; the merged counts are inserted in
    /// sorted order so the model does not depend on the number of workers.
    pub fn train_ids(
        sequences: &[Vec<u32>],
        order: usize,
        vocab: Vocabulary,
        smoothing: SmoothingConfig,
    ) -> Result<Self> {
        check_order(order)?;
        smoothing.validate()?;
        if let Some(bad) = sequences.iter().flatten().find(|&&id| id as usize >= vocab.len()) {
            return Err(Error::Config(format!("token id {bad} outside vocabulary")));
        }
        let counts: HashMap<Vec<u32>, u64> = sequences
            .par_iter()
            .fold(HashMap::new, |mut acc, seq| {
                for (i, &w) in seq.iter().enumerate() {
                    let mut key = Vec::with_capacity(order);
                    key.push(w);
                    key.extend(reversed_history(&seq[..i], order - 1));
                    *acc.entry(key).or_default() += 1;
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            });
        let mut keys: Vec<(Vec<u32>, u64)> = counts.into_iter().collect();
        keys.sort_unstable();
        let mut trie = CountTrie::default();
        for (key, n) in keys {
            trie.add(&key[1..], key[0], n);
        }
        trie.rebuild_continuations();
        Ok(Self {
            order,
            vocab,
            smoothing,
            trie,
        })
    }

    pub(crate) fn from_parts(
        order: usize,
        vocab: Vocabulary,
        smoothing: SmoothingConfig,
        trie: CountTrie,
    ) -> Result<Self> {
        check_order(order)?;
        smoothing.validate()?;
        Ok(Self {
            order,
            vocab,
            smoothing,
            trie,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn smoothing(&self) -> SmoothingConfig {
        self.smoothing
    }

    /// Same counts, different smoothing.
    pub fn with_smoothing(&self, smoothing: SmoothingConfig) -> Result<Self> {
        smoothing.validate()?;
        Ok(Self {
            smoothing,
            ..self.clone()
        })
    }

    pub fn trie(&self) -> &CountTrie {
        &self.trie
    }

    /// Raw count of `context ++ [word]`, context given in text order.
    pub fn count(&self, context: &[u32], word: u32) -> u64 {
        let rev: Vec<u32> = context.iter().rev().copied().collect();
        self.trie.count(&rev, word)
    }

    /// Smoothed P(word | context). The context is the full preceding token
    /// list in text order; only its last `order - 1` tokens are used, with
    /// begin-of-sequence padding when it is shorter.
    pub fn prob(&self, context: &[u32], word: u32) -> f64 {
        let rev = reversed_history(context, self.order - 1);
        let chain = self.trie.chain(&rev, self.order - 1);
        self.prob_on_chain(&chain, word)
    }

    pub fn prob_tokens(&self, context: &[&str], word: &str) -> f64 {
        let ctx = self.vocab.encode(context.iter().copied());
        self.prob(&ctx, self.vocab.id(word))
    }

    fn prob_on_chain(&self, chain: &[usize], word: u32) -> f64 {
        let v = self.vocab.len() as f64;
        let full = chain.len() == self.order;
        match self.smoothing.kind {
            SmoothingKind::Mle => {
                if full {
                    let n = self.trie.node(*chain.last().expect("root"));
                    n.followers.get(&word).copied().unwrap_or(0) as f64 / n.total as f64
                } else {
                    1.0 / v
                }
            }
            SmoothingKind::JelinekMercer => {
                let lambda = self.smoothing.lambda;
                let mut p = 1.0 / v;
                for &id in chain {
                    let n = self.trie.node(id);
                    if n.total == 0 {
                        continue;
                    }
                    let c = n.followers.get(&word).copied().unwrap_or(0) as f64;
                    p = (1.0 - lambda) * p + lambda * c / n.total as f64;
                }
                p
            }
            SmoothingKind::KneserNey => {
                let d = self.smoothing.discount;
                let mut p = 1.0 / v;
                for (depth, &id) in chain.iter().enumerate() {
                    let n = self.trie.node(id);
                    let (map, total) = if depth == self.order - 1 {
                        (&n.followers, n.total)
                    } else {
                        (&n.cont, n.cont_total)
                    };
                    if total == 0 {
                        continue;
                    }
                    let t = total as f64;
                    let c = map.get(&word).copied().unwrap_or(0) as f64;
                    p = d * map.len() as f64 / t * p + (c - d).max(0.0) / t;
                }
                p
            }
        }
    }

    /// P(· | context) over the whole vocabulary, `<unk>` included.
    pub fn distribution(&self, context: &[u32]) -> Vec<f64> {
        let rev = reversed_history(context, self.order - 1);
        let chain = self.trie.chain(&rev, self.order - 1);
        let vsize = self.vocab.len();
        let uniform = 1.0 / vsize as f64;
        let mut p = vec![uniform; vsize];
        match self.smoothing.kind {
            SmoothingKind::Mle => {
                if chain.len() == self.order {
                    let n = self.trie.node(*chain.last().expect("root"));
                    p.iter_mut().for_each(|x| *x = 0.0);
                    for (&w, &c) in &n.followers {
                        p[w as usize] = c as f64 / n.total as f64;
                    }
                }
            }
            SmoothingKind::JelinekMercer => {
                let lambda = self.smoothing.lambda;
                for &id in &chain {
                    let n = self.trie.node(id);
                    if n.total == 0 {
                        continue;
                    }
                    p.iter_mut().for_each(|x| *x *= 1.0 - lambda);
                    // (1-λ)·p + λ·c/T, in the same operation order as prob()
                    for (&w, &c) in &n.followers {
                        let i = w as usize;
                        p[i] += lambda * c as f64 / n.total as f64;
                    }
                }
            }
            SmoothingKind::KneserNey => {
                let d = self.smoothing.discount;
                for (depth, &id) in chain.iter().enumerate() {
                    let n = self.trie.node(id);
                    let (map, total) = if depth == self.order - 1 {
                        (&n.followers, n.total)
                    } else {
                        (&n.cont, n.cont_total)
                    };
                    if total == 0 {
                        continue;
                    }
                    let t = total as f64;
                    let backoff = d * map.len() as f64 / t;
                    p.iter_mut().for_each(|x| *x *= backoff);
                    for (&w, &c) in map {
                        p[w as usize] += (c as f64 - d).max(0.0) / t;
                    }
                }
            }
        }
        p
    }

    /// Average negative log2 probability per predicted token.
    ///
    /// Every token of every sequence is a target, the method name included.
    /// With `exclude_oov`, targets that map to `<unk>` are skipped (they
    /// still serve as context).
    pub fn cross_entropy(&self, sequences: &[Vec<u32>], exclude_oov: bool) -> Result<f64> {
        let (sum, n) = sequences
            .par_iter()
            .map(|seq| {
                let mut sum = 0.0f64;
                let mut n = 0u64;
                for (i, &w) in seq.iter().enumerate() {
                    if exclude_oov && w == Vocabulary::UNK_ID {
                        continue;
                    }
                    sum += self.prob(&seq[..i], w).log2();
                    n += 1;
                }
                (sum, n)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold((0.0, 0u64), |(s, n), (a, b)| (s + a, n + b));
        if n == 0 {
            return Err(Error::Empty("no tokens to evaluate cross-entropy on"));
        }
        Ok(-sum / n as f64)
    }

    /// The `k` most probable tokens after `context`, descending, ties by
    /// ascending id. `<unk>` is never suggested; with a cache, scope-local
    /// ids can be.
    pub fn predict_top_k(&self, cache: Option<&CacheState>, context: &[u32], k: usize) -> Vec<(u32, f64)> {
        let mut dist = self.distribution(&self.base_context(context));
        if let Some(cache) = cache {
            dist.resize(self.vocab.len() + cache.local_len(), 0.0);
            cache.mix_into(context, &mut dist);
        }
        top_k(&dist, k)
    }

    /// `context` with ids outside the vocabulary (cache-local ids) mapped
    /// to `<unk>`.
    pub(crate) fn base_context(&self, context: &[u32]) -> Vec<u32> {
        let n = self.vocab.len();
        context
            .iter()
            .map(|&w| if (w as usize) < n { w } else { Vocabulary::UNK_ID })
            .collect()
    }

    /// `key=value` summary.
    pub fn stats(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "order={}", self.order);
        let _ = writeln!(s, "smoothing={}", self.smoothing.kind.as_str());
        let _ = writeln!(s, "lambda={}", self.smoothing.lambda);
        let _ = writeln!(s, "discount={}", self.smoothing.discount);
        let _ = writeln!(s, "vocab_size={}", self.vocab.len());
        let _ = writeln!(s, "min_count={}", self.vocab.min_count());
        let _ = writeln!(s, "token_mode={}", self.vocab.mode().as_str());
        let _ = writeln!(s, "trie_nodes={}", self.trie.len());
        let _ = writeln!(s, "tokens={}", self.trie.node(trie::ROOT).total);
        for (i, n) in self.trie.ngrams_per_order().iter().enumerate() {
            let _ = writeln!(s, "ngrams_order_{}={}", i + 1, n);
        }
        s
    }
}

/// `ctx` reversed (nearest token first), truncated or BOS-padded to `len`.
pub(crate) fn reversed_history(ctx: &[u32], len: usize) -> Vec<u32> {
    ctx.iter()
        .rev()
        .copied()
        .chain(std::iter::repeat(BOS))
        .take(len)
        .collect()
}

/// Top `k` ids of `dist` excluding `<unk>`, descending, ties by id.
pub(crate) fn top_k(dist: &[f64], k: usize) -> Vec<(u32, f64)> {
    let mut ids: Vec<u32> = (1..dist.len() as u32).collect();
    let cmp = |a: &u32, b: &u32| dist[*b as usize].total_cmp(&dist[*a as usize]).then_with(|| a.cmp(b));
    if k < ids.len() {
        ids.select_nth_unstable_by(k, cmp);
        ids.truncate(k);
    }
    ids.sort_unstable_by(cmp);
    ids.into_iter().map(|id| (id, dist[id as usize])).collect()
}
