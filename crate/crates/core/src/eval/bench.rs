use std::collections::BTreeMap;

use rayon::prelude::*;

use super::metrics::Outcome;
use super::report::{EvalReport, ProjectReport, Scores, DEFAULT_KS};
use crate::candidates::{coverage, BenchmarkSet, CallSiteRecord};
use crate::corpus::Vocabulary;
use crate::embedding::PvModel;
use crate::error::Result;
use crate::ngram::{CacheScope, CacheState, NGramModel};
use crate::ranker::{complete, RankerConfig, Suggester};

/// Row name of the all-projects aggregate, present with two or more projects.
pub const POOLED: &str = "(all)";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub ranker: RankerConfig,
    pub ks: Vec<usize>,
    pub cache_gamma: f64,
    pub cache_capacity: usize,
    pub cache_scope: CacheScope,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            ranker: RankerConfig::default(),
            ks: DEFAULT_KS.to_vec(),
            cache_gamma: crate::ngram::DEFAULT_GAMMA,
            cache_capacity: crate::ngram::DEFAULT_CAPACITY,
            cache_scope: CacheScope::File,
        }
    }
}

/// Trained models to compare against the alphabetical baseline. With an
/// n-gram model, both the plain and the cache-augmented variant run.
#[derive(Default, Clone, Copy)]
pub struct Systems<'a> {
    pub pv: Option<&'a PvModel>,
    pub ngram: Option<&'a NGramModel>,
}

/// Outcomes and latencies of one system, in record order.
#[derive(Debug, Clone, Default)]
pub struct SystemRun {
    pub label: String,
    pub outcomes: Vec<Outcome>,
    pub latencies_ms: Vec<f64>,
    /// Sites whose context had no in-vocabulary token.
    pub all_oov: usize,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub report: EvalReport,
    pub runs: Vec<SystemRun>,
    /// Soundness and report-invariant violations, one line each.
    pub violations: Vec<String>,
}

fn soundness(label: &str, site: &CallSiteRecord, suggestions: &[String], max: usize, out: &mut Vec<String>) {
    if suggestions.len() > max {
        out.push(format!(
            "{label}/{}: {} suggestions exceed max_size {max}",
            site.site_id,
            suggestions.len()
        ));
    }
    for s in suggestions {
        if site.candidates.binary_search(s).is_err() {
            out.push(format!("{label}/{}: suggestion {s:?} is not a candidate", site.site_id));
        }
    }
}

fn run_parallel<'m>(
    records: &[CallSiteRecord],
    make: impl Fn() -> Suggester<'m> + Sync,
    cfg: &RankerConfig,
) -> SystemRun {
    let results: Vec<_> = records
        .par_iter()
        .map(|r| {
            let mut s = make();
            let c = complete(r, &mut s, cfg);
            (c.list.tokens(), c.latency.as_secs_f64() * 1e3, c.all_oov)
        })
        .collect();
    collect_run(make().label(), records, results)
}

fn collect_run(label: &str, records: &[CallSiteRecord], results: Vec<(Vec<String>, f64, bool)>) -> SystemRun {
    let mut run = SystemRun {
        label: label.to_string(),
        ..SystemRun::default()
    };
    for (r, (tokens, ms, oov)) in records.iter().zip(results) {
        run.outcomes.push(Outcome::new(r.gold.clone(), tokens));
        run.latencies_ms.push(ms);
        run.all_oov += oov as usize;
    }
    run
}

/// Rank every call site with every available system and score the results
/// per project. The cache variant walks the records in order.
pub fn evaluate(set: &BenchmarkSet, systems: Systems<'_>, cfg: &BenchConfig) -> Result<BenchResult> {
    cfg.ranker.validate()?;
    let records = &set.records;
    let mut runs = vec![run_parallel(records, || Suggester::Alphabetical, &cfg.ranker)];
    if let Some(pv) = systems.pv {
        runs.push(run_parallel(records, || Suggester::Pv(pv), &cfg.ranker));
    }
    if let Some(model) = systems.ngram {
        runs.push(run_parallel(records, || Suggester::NGram(model), &cfg.ranker));
        let mut s = Suggester::NGramCache {
            model,
            cache: CacheState::new(model.order(), cfg.cache_gamma, cfg.cache_capacity)?,
            scope: cfg.cache_scope,
        };
        let results = records
            .iter()
            .map(|r| {
                let c = complete(r, &mut s, &cfg.ranker);
                (c.list.tokens(), c.latency.as_secs_f64() * 1e3, c.all_oov)
            })
            .collect();
        runs.push(collect_run(s.label(), records, results));
    }

    let mut violations = Vec::new();
    for run in &runs {
        for (site, o) in records.iter().zip(&run.outcomes) {
            soundness(&run.label, site, &o.suggestions, cfg.ranker.max_size, &mut violations);
        }
    }

    let coverage_vocab: Option<&Vocabulary> = systems.pv.map(|m| m.vocab()).or(systems.ngram.map(|m| m.vocab()));
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups.entry(r.project_id.as_str()).or_default().push(i);
    }
    let mut projects = Vec::new();
    let all: Vec<usize> = (0..records.len()).collect();
    let pooled = (groups.len() > 1).then_some((POOLED, all));
    for (project, idx) in groups.into_iter().chain(pooled) {
        let mut scores = BTreeMap::new();
        for run in &runs {
            let outcomes: Vec<Outcome> = idx.iter().map(|&i| run.outcomes[i].clone()).collect();
            let lat: Vec<f64> = idx.iter().map(|&i| run.latencies_ms[i]).collect();
            scores.insert(run.label.clone(), Scores::compute(&outcomes, &lat, &cfg.ks)?);
        }
        let excluded = if project == POOLED {
            set.excluded
        } else {
            set.excluded_per_project.get(project).copied().unwrap_or(0)
        };
        projects.push(ProjectReport {
            project: project.to_string(),
            sites: idx.len(),
            excluded,
            coverage: coverage_vocab.map(|v| coverage(idx.iter().map(|&i| &records[i]), v)),
            scores,
        });
    }
    let report = EvalReport {
        ks: {
            let mut ks = cfg.ks.clone();
            ks.sort_unstable();
            ks.dedup();
            ks
        },
        systems: runs.iter().map(|r| r.label.clone()).collect(),
        candidate_source: set.source_label.clone(),
        projects,
    };
    violations.extend(report.violations());
    Ok(BenchResult {
        report,
        runs,
        violations,
    })
}
