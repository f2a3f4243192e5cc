//! Local n-gram cache mixed into a base model at evaluation time.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{reversed_history, NGramModel};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Granularity at which the cache is reset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CacheScope {
    #[default]
    File,
    Project,
}

impl CacheScope {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "file" => Some(Self::File),
            "project" => Some(Self::Project),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CacheScope::File => "file",
            CacheScope::Project => "project",
        }
    }
}

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_CAPACITY: usize = 10_000;

#[derive(Debug, Default, Clone)]
struct Followers {
    counts: BTreeMap<u32, u64>,
    total: u64,
}

/// Counts of n-grams seen in the current scope, bounded to the most recent
/// `capacity` observations.
///
/// `P = γ·P_cache + (1-γ)·P_base`, where `P_cache` is the relative
/// frequency under the longest context suffix the cache has seen. When no
/// suffix has been seen the base probability is returned unchanged.
///
/// Tokens outside the model vocabulary that are observed through
/// [`CacheState::observe_tokens`] get scope-local ids `|V|, |V|+1, …`, so
/// the cache can predict identifiers the base model has never seen. Their
/// base probability is 0.
#[derive(Debug, Clone)]
pub struct CacheState {
    order: usize,
    gamma: f64,
    capacity: usize,
    scope: Option<String>,
    events: VecDeque<(Vec<u32>, u32)>,
    counts: HashMap<Vec<u32>, Followers>,
    local: Vec<String>,
    local_ids: HashMap<String, u32>,
}

impl CacheState {
    pub fn new(order: usize, gamma: f64, capacity: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::Config(format!("cache order must be at least 2, got {order}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Config(format!("cache gamma must lie in (0,1), got {gamma}")));
        }
        if capacity == 0 {
            return Err(Error::Config("cache capacity must be positive".into()));
        }
        Ok(Self {
            order,
            gamma,
            capacity,
            scope: None,
            events: VecDeque::new(),
            counts: HashMap::new(),
            local: Vec::new(),
            local_ids: HashMap::new(),
        })
    }

    /// Cache with the model's order and default weight and capacity.
    pub fn for_model(model: &NGramModel) -> Self {
        Self::new(model.order(), DEFAULT_GAMMA, DEFAULT_CAPACITY).expect("defaults are valid")
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn scope(&self) -> Option<&str> {
        self.scope.as_deref()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Enter scope `id`; entering a different scope drops all counts.
    pub fn open_scope(&mut self, id: &str) {
        if self.scope.as_deref() != Some(id) {
            self.clear();
            self.scope = Some(id.to_string());
        }
    }

    pub fn clear(&mut self) {
        self.events.clear();
        self.counts.clear();
        self.local.clear();
        self.local_ids.clear();
        self.scope = None;
    }

    /// Number of scope-local token ids handed out.
    pub fn local_len(&self) -> usize {
        self.local.len()
    }

    /// Vocabulary id of `token`, else its scope-local id, else `<unk>`.
    pub fn lookup(&self, vocab: &Vocabulary, token: &str) -> u32 {
        match vocab.known_id(token) {
            Some(id) if id != Vocabulary::UNK_ID => id,
            _ => self
                .local_ids
                .get(token)
                .map_or(Vocabulary::UNK_ID, |&k| (vocab.len() + k as usize) as u32),
        }
    }

    fn intern(&mut self, vocab: &Vocabulary, token: &str) -> u32 {
        match vocab.known_id(token) {
            Some(id) if id != Vocabulary::UNK_ID => id,
            _ => {
                let k = match self.local_ids.get(token) {
                    Some(&k) => k,
                    None => {
                        let k = self.local.len() as u32;
                        self.local.push(token.to_string());
                        self.local_ids.insert(token.to_string(), k);
                        k
                    }
                };
                (vocab.len() + k as usize) as u32
            }
        }
    }

    /// Token for an id from [`CacheState::lookup`].
    pub fn token<'a>(&'a self, vocab: &'a Vocabulary, id: u32) -> &'a str {
        let n = vocab.len();
        if (id as usize) < n {
            vocab.token(id)
        } else {
            &self.local[id as usize - n]
        }
    }

    /// [`CacheState::observe`] on token strings, interning unknown tokens.
    pub fn observe_tokens(&mut self, vocab: &Vocabulary, context: &[String], word: &str) {
        let ctx: Vec<u32> = context.iter().map(|t| self.intern(vocab, t)).collect();
        let w = self.intern(vocab, word);
        self.observe(&ctx, w);
    }

    /// Record that `word` followed `context` (text order).
    pub fn observe(&mut self, context: &[u32], word: u32) {
        let rev = reversed_history(context, self.order - 1);
        for l in 1..self.order {
            let f = self.counts.entry(rev[..l].to_vec()).or_default();
            *f.counts.entry(word).or_default() += 1;
            f.total += 1;
        }
        self.events.push_back((rev, word));
        while self.events.len() > self.capacity {
            let (old, w) = self.events.pop_front().expect("non-empty");
            for l in 1..self.order {
                let key = &old[..l];
                let f = self.counts.get_mut(key).expect("observed");
                let c = f.counts.get_mut(&w).expect("observed");
                *c -= 1;
                if *c == 0 {
                    f.counts.remove(&w);
                }
                f.total -= 1;
                if f.total == 0 {
                    self.counts.remove(key);
                }
            }
        }
    }

    fn longest_seen(&self, context: &[u32]) -> Option<&Followers> {
        let rev = reversed_history(context, self.order - 1);
        (1..self.order).rev().find_map(|l| self.counts.get(&rev[..l]))
    }

    /// Cache-interpolated probability of `word` after `context`.
    pub fn cache_prob(&self, model: &NGramModel, context: &[u32], word: u32) -> f64 {
        let base = if (word as usize) < model.vocab().len() {
            model.prob(&model.base_context(context), word)
        } else {
            0.0
        };
        match self.longest_seen(context) {
            None => base,
            Some(f) => {
                let pc = f.counts.get(&word).copied().unwrap_or(0) as f64 / f.total as f64;
                self.gamma * pc + (1.0 - self.gamma) * base
            }
        }
    }

    /// Apply the cache mixture to a full base distribution in place. Pad
    /// `dist` with zeros to `|V| + local_len()` first to score local ids.
    pub fn mix_into(&self, context: &[u32], dist: &mut [f64]) {
        let Some(f) = self.longest_seen(context) else {
            return;
        };
        let g = self.gamma;
        dist.iter_mut().for_each(|p| *p *= 1.0 - g);
        for (&w, &c) in &f.counts {
            if let Some(p) = dist.get_mut(w as usize) {
                *p += g * (c as f64 / f.total as f64);
            }
        }
    }
}
