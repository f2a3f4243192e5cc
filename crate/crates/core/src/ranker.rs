//! Context → temporary list from a model → intersection with candidates.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use log::{debug, warn};

use crate::candidates::CallSiteRecord;
use crate::corpus::{FunctionSequence, Vocabulary};
use crate::embedding::PvModel;
use crate::error::{Error, Result};
use crate::ngram::{CacheScope, CacheState, NGramModel};

#[derive(Debug, Clone, PartialEq)]
pub struct RankerConfig {
    pub max_size: usize,
    /// Neighbors scoring below this cosine end the walk.
    pub sim_threshold: f64,
    /// Neighbors fetched, and the cap on temporary-list length.
    pub neighbor_budget: usize,
    /// Pad the final list with the remaining candidates in stored order.
    pub fill_tail: bool,
    /// Treat calls already in the context as seen when walking neighbors.
    pub skip_context: bool,
}

impl Default for RankerConfig {
    fn default() -> Self {
        Self {
            max_size: 10,
            sim_threshold: 0.25,
            neighbor_budget: 100,
            fill_tail: false,
            skip_context: false,
        }
    }
}

impl RankerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_size == 0 {
            return Err(Error::Config("max_size must be at least 1".into()));
        }
        if self.neighbor_budget == 0 {
            return Err(Error::Config("neighbor_budget must be at least 1".into()));
        }
        if !(-1.0..=1.0).contains(&self.sim_threshold) {
            return Err(Error::Config(format!(
                "sim_threshold must lie in [-1, 1], got {}",
                self.sim_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    pub token: String,
    /// Cosine of the neighbor it came from, or a probability.
    pub score: f64,
}

/// Ordered suggestions without duplicates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuggestionList {
    pub items: Vec<Suggestion>,
}

impl SuggestionList {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn tokens(&self) -> Vec<String> {
        self.items.iter().map(|s| s.token.clone()).collect()
    }

    /// 1-based rank of `token`.
    pub fn rank_of(&self, token: &str) -> Option<usize> {
        self.items.iter().position(|s| s.token == token).map(|i| i + 1)
    }
}

/// Method name followed by the calls before `position`.
pub fn extract_context(seq: &FunctionSequence, position: usize) -> Result<Vec<String>> {
    if position >= seq.calls.len() {
        return Err(Error::PositionOutOfRange {
            position,
            len: seq.calls.len(),
        });
    }
    Ok(seq.tokens().take(position + 1).map(str::to_string).collect())
}

/// Walk the nearest training sequences by descending cosine, collecting
/// their calls in order. The second value is true when every context token
/// was out of vocabulary.
pub fn temporary_list_pv(model: &PvModel, context: &[String], config: &RankerConfig) -> (SuggestionList, bool) {
    let refs: Vec<&str> = context.iter().map(String::as_str).collect();
    let inferred = model.infer_vector(&refs, model.hyper().infer_steps);
    if inferred.all_dropped {
        debug!("context {context:?} has no in-vocabulary token; empty suggestion list");
        return (SuggestionList::default(), true);
    }
    let hits = match model.most_similar(&inferred.vector, config.neighbor_budget) {
        Ok(h) => h,
        Err(e) => {
            warn!("similarity search failed: {e}");
            return (SuggestionList::default(), true);
        }
    };
    let vocab = model.vocab();
    let mut seen = HashSet::new();
    if config.skip_context {
        seen.extend(context.iter().filter_map(|t| vocab.known_id(t)));
    }
    let mut list = SuggestionList::default();
    'walk: for hit in hits {
        if hit.score < config.sim_threshold {
            break;
        }
        for &id in &model.doc(hit.doc_id).ids[1..] {
            if id == Vocabulary::UNK_ID || !seen.insert(id) {
                continue;
            }
            list.items.push(Suggestion {
                token: vocab.token(id).to_string(),
                score: hit.score,
            });
            if list.len() >= config.neighbor_budget {
                break 'walk;
            }
        }
    }
    (list, false)
}

/// The `neighbor_budget` most probable next calls.
pub fn temporary_list_ngram(
    model: &NGramModel,
    cache: Option<&CacheState>,
    context: &[String],
    config: &RankerConfig,
) -> SuggestionList {
    let vocab = model.vocab();
    let ids: Vec<u32> = match cache {
        Some(c) => context.iter().map(|t| c.lookup(vocab, t)).collect(),
        None => vocab.encode(context.iter().map(String::as_str)),
    };
    let items = model
        .predict_top_k(cache, &ids, config.neighbor_budget)
        .into_iter()
        .map(|(id, p)| Suggestion {
            token: match cache {
                Some(c) => c.token(vocab, id).to_string(),
                None => vocab.token(id).to_string(),
            },
            score: p,
        })
        .collect();
    SuggestionList { items }
}

/// Keep temporary-list tokens that are candidates, in order, up to
/// `max_size`; with `fill_tail`, pad with the remaining candidates.
pub fn rank(temporary: &SuggestionList, candidates: &[String], config: &RankerConfig) -> SuggestionList {
    let allowed: HashSet<&str> = candidates.iter().map(String::as_str).collect();
    let mut taken: HashSet<&str> = HashSet::new();
    let mut out = SuggestionList::default();
    for s in &temporary.items {
        if out.len() >= config.max_size {
            break;
        }
        if allowed.contains(s.token.as_str()) && taken.insert(s.token.as_str()) {
            out.items.push(s.clone());
        }
    }
    if config.fill_tail {
        for c in candidates {
            if out.len() >= config.max_size {
                break;
            }
            if taken.insert(c.as_str()) {
                out.items.push(Suggestion {
                    token: c.clone(),
                    score: 0.0,
                });
            }
        }
    }
    out
}

/// A source of temporary lists. The cache variant carries its own state
/// and must see call sites in file order.
#[allow(clippy::large_enum_variant)]
pub enum Suggester<'a> {
    /// Candidates in stored (alphabetical) order.
    Alphabetical,
    Pv(&'a PvModel),
    NGram(&'a NGramModel),
    NGramCache {
        model: &'a NGramModel,
        cache: CacheState,
        scope: CacheScope,
    },
}

impl Suggester<'_> {
    pub fn label(&self) -> &'static str {
        match self {
            Suggester::Alphabetical => "baseline",
            Suggester::Pv(_) => "pv",
            Suggester::NGram(_) => "ngram",
            Suggester::NGramCache { .. } => "ngram_cache",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Completion {
    pub list: SuggestionList,
    pub latency: Duration,
    /// The context had no in-vocabulary token.
    pub all_oov: bool,
}

/// Rank one call site end to end. With a cache, the gold call is recorded
/// afterwards as if the developer had typed it.
pub fn complete(site: &CallSiteRecord, suggester: &mut Suggester<'_>, config: &RankerConfig) -> Completion {
    let start = Instant::now();
    let mut all_oov = false;
    let temporary = match suggester {
        Suggester::Alphabetical => SuggestionList::default(),
        Suggester::Pv(model) => {
            let (list, oov) = temporary_list_pv(model, &site.context, config);
            all_oov = oov;
            list
        }
        Suggester::NGram(model) => temporary_list_ngram(model, None, &site.context, config),
        Suggester::NGramCache { model, cache, scope } => {
            cache.open_scope(match scope {
                CacheScope::File => &site.file_id,
                CacheScope::Project => &site.project_id,
            });
            temporary_list_ngram(model, Some(cache), &site.context, config)
        }
    };
    let fill = RankerConfig {
        fill_tail: config.fill_tail || matches!(suggester, Suggester::Alphabetical),
        ..config.clone()
    };
    let list = rank(&temporary, &site.candidates, &fill);
    let latency = start.elapsed();
    if let Suggester::NGramCache { model, cache, .. } = suggester {
        cache.observe_tokens(model.vocab(), &site.context, &site.gold);
    }
    Completion { list, latency, all_oov }
}
