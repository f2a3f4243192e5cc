//! Frequency-thresholded token vocabulary.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::extract::{FunctionSequence, TokenMode};
use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";

/// Default cut-off for full function names.
pub const DEFAULT_MIN_COUNT_FULL: u64 = 20;
/// Default cut-off for subtokens.
pub const DEFAULT_MIN_COUNT_SUBTOKENS: u64 = 5;

pub fn default_min_count(mode: TokenMode) -> u64 {
    match mode {
        TokenMode::FullNames => DEFAULT_MIN_COUNT_FULL,
        TokenMode::Subtokens => DEFAULT_MIN_COUNT_SUBTOKENS,
    }
}

/// Corpus counts before and after the min-count cut-off.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VocabStats {
    pub sequences: u64,
    pub tokens: u64,
    pub types: u64,
    /// Tokens whose type survived the cut-off.
    pub tokens_kept: u64,
    /// Surviving types plus `<unk>`.
    pub types_kept: u64,
}

impl VocabStats {
    /// `key=value` lines.
    pub fn to_report(&self, mode: TokenMode, min_count: u64) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mode={}", mode.as_str());
        let _ = writeln!(s, "min_count={min_count}");
        let _ = writeln!(s, "sequences={}", self.sequences);
        let _ = writeln!(s, "tokens={}", self.tokens);
        let _ = writeln!(s, "types={}", self.types);
        let _ = writeln!(s, "tokens_after_min_count={}", self.tokens_kept);
        let _ = writeln!(s, "types_after_min_count={}", self.types_kept);
        s
    }
}

/// Token ↔ id map. Id 0 is always `<unk>`; the remaining ids are assigned by
/// descending frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index: HashMap<String, u32>,
    tokens: Vec<String>,
    freqs: Vec<u64>,
    min_count: u64,
    mode: TokenMode,
    stats: VocabStats,
}

impl Vocabulary {
    pub const UNK_ID: u32 = 0;

    /// Count tokens (method names and calls jointly) and apply the cut-off.
    ///
    /// Every sequence must be in `mode`. Counting is split across rayon
    /// workers; the merged histogram does not depend on the split.
    pub fn build(sequences: &[FunctionSequence], min_count: u64, mode: TokenMode) -> Result<Self> {
        if let Some(bad) = sequences.iter().find(|s| s.mode != mode) {
            return Err(Error::MixedTokenModes {
                expected: mode.as_str(),
                found: bad.mode.as_str(),
                source_id: bad.source_id.clone(),
            });
        }
        let counts = sequences
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<&str, u64>, seq| {
                for tok in seq.tokens() {
                    *acc.entry(tok).or_default() += 1;
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            });
        if sequences.is_empty() {
            log::warn!("building a vocabulary from an empty corpus");
        }
        let mut stats = VocabStats {
            sequences: sequences.len() as u64,
            tokens: counts.values().sum(),
            types: counts.len() as u64,
            ..VocabStats::default()
        };
        Ok(Self::from_counts(
            counts.into_iter().map(|(k, v)| (k.to_string(), v)),
            min_count,
            mode,
            &mut stats,
        ))
    }

    fn from_counts(
        counts: impl Iterator<Item = (String, u64)>,
        min_count: u64,
        mode: TokenMode,
        stats: &mut VocabStats,
    ) -> Self {
        let mut unk_freq = 0;
        let mut kept: Vec<(String, u64)> = Vec::new();
        for (tok, n) in counts {
            if n >= min_count && tok != UNK {
                kept.push((tok, n));
            } else {
                unk_freq += n;
            }
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        stats.tokens_kept = kept.iter().map(|(_, n)| n).sum();
        stats.types_kept = kept.len() as u64 + 1;

        let mut tokens = Vec::with_capacity(kept.len() + 1);
        let mut freqs = Vec::with_capacity(kept.len() + 1);
        tokens.push(UNK.to_string());
        freqs.push(unk_freq);
        for (tok, n) in kept {
            tokens.push(tok);
            freqs.push(n);
        }
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self {
            index,
            tokens,
            freqs,
            min_count,
            mode,
            stats: stats.clone(),
        }
    }

    /// Rebuild from stored (token, frequency) rows; row 0 must be `<unk>`.
    pub fn from_parts(
        tokens: Vec<String>,
        freqs: Vec<u64>,
        min_count: u64,
        mode: TokenMode,
        stats: VocabStats,
    ) -> Result<Self> {
        if tokens.first().map(String::as_str) != Some(UNK) || tokens.len() != freqs.len() {
            return Err(Error::Format("vocabulary must start with <unk>".into()));
        }
        let index: HashMap<String, u32> = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        if index.len() != tokens.len() {
            return Err(Error::Format("duplicate vocabulary entry".into()));
        }
        Ok(Self {
            index,
            tokens,
            freqs,
            min_count,
            mode,
            stats,
        })
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(Self::UNK_ID)
    }

    /// Id of an in-vocabulary token; `None` for anything mapping to `<unk>`.
    pub fn known_id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied().filter(|&id| id != Self::UNK_ID)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn freq(&self, id: u32) -> u64 {
        self.freqs[id as usize]
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn mode(&self) -> TokenMode {
        self.mode
    }

    pub fn stats(&self) -> &VocabStats {
        &self.stats
    }

    pub fn contains(&self, token: &str) -> bool {
        self.known_id(token).is_some()
    }

    pub fn encode<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> Vec<u32> {
        tokens.into_iter().map(|t| self.id(t)).collect()
    }

    pub fn encode_sequence(&self, seq: &FunctionSequence) -> Vec<u32> {
        self.encode(seq.tokens())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(toks: &[&str]) -> FunctionSequence {
        FunctionSequence::new("p/F.java", toks[0], toks[1..].iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn threshold_collapses_rare_tokens() {
        let corpus = vec![seq(&["a", "b"]), seq(&["a", "b"]), seq(&["a", "c"])];
        let v = Vocabulary::build(&corpus, 2, TokenMode::FullNames).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.id("c"), Vocabulary::UNK_ID);
        assert_ne!(v.id("a"), Vocabulary::UNK_ID);
        assert_ne!(v.id("b"), Vocabulary::UNK_ID);
        assert_eq!(v.freq(Vocabulary::UNK_ID), 1);
        assert_eq!(v.token(1), "a");
        assert_eq!(v.stats().types, 3);
        assert_eq!(v.stats().tokens_kept, 5);
    }

    #[test]
    fn zero_threshold_keeps_everything() {
        let corpus = vec![seq(&["a", "b"]), seq(&["a", "c"])];
        let v = Vocabulary::build(&corpus, 0, TokenMode::FullNames).unwrap();
        for s in &corpus {
            assert!(v.encode_sequence(s).iter().all(|&id| id != Vocabulary::UNK_ID));
        }
    }

    #[test]
    fn empty_corpus_has_only_unk() {
        let v = Vocabulary::build(&[], 20, TokenMode::FullNames).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.token(0), UNK);
    }

    #[test]
    fn mixing_modes_is_rejected() {
        let mut s = seq(&["a", "b"]);
        s.mode = TokenMode::Subtokens;
        assert!(matches!(
            Vocabulary::build(&[s], 0, TokenMode::FullNames),
            Err(Error::MixedTokenModes { .. })
        ));
    }

    #[test]
    fn zipfian_type_count_matches_histogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let corpus: Vec<FunctionSequence> = (0..1000)
            .map(|_| {
                let len = rng.random_range(1..8);
                let toks: Vec<String> = (0..len)
                    .map(|_| {
                        // inverse-CDF draw from a 1/r law over 400 ranks
                        let u: f64 = rng.random();
                        let r = (400f64.powf(u)).floor() as usize;
                        format!("t{r}")
                    })
                    .collect();
                FunctionSequence::new("p/F.java", toks[0].clone(), toks[1..].to_vec())
            })
            .collect();
        let mut hist: std::collections::BTreeMap<String, u64> = Default::default();
        for s in &corpus {
            for t in s.tokens() {
                *hist.entry(t.to_string()).or_default() += 1;
            }
        }
        let expected = hist.values().filter(|&&n| n >= 20).count() + 1;
        let v = Vocabulary::build(&corpus, 20, TokenMode::FullNames).unwrap();
        assert_eq!(v.len(), expected);
        assert!(expected > 2 && expected < hist.len());
    }

    #[test]
    fn histogram_is_independent_of_thread_count() {
        let corpus: Vec<FunctionSequence> = (0..500)
            .map(|i| seq(&[&format!("m{}", i % 7), &format!("c{}", i % 13), "x"]))
            .collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| Vocabulary::build(&corpus, 3, TokenMode::FullNames).unwrap());
        let b = four.install(|| Vocabulary::build(&corpus, 3, TokenMode::FullNames).unwrap());
        assert_eq!(a, b);
    }
}
