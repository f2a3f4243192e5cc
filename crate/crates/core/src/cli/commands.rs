use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};

use super::{
    BenchArgs, Common, CompleteArgs, EntropyArgs, ExtractArgs, Failure, GenCallsitesArgs, RankArgs, TrainInput,
    TrainNgramArgs, TrainPvArgs, VocabArgs,
};
use crate::candidates::{
    check_disjoint, read_callsites, synthesize_call_sites, write_callsites, BenchmarkSet, CallSiteRecord,
    CandidateSource, NaiveCandidates,
};
use crate::config::{read_config, Manifest, Resolver};
use crate::corpus::{
    default_min_count, extract_tree, read_sequences, write_sequences, FunctionSequence, TokenMode, TokenizerConfig,
    Vocabulary,
};
use crate::embedding::{HyperParams, PvModel};
use crate::eval::{compare_report, entropy_csv, entropy_rows, evaluate, BenchConfig, EntropyConfig, OovMode, Systems};
use crate::ngram::{
    CacheScope, CacheState, NGramModel, SmoothingConfig, SmoothingKind, DEFAULT_CAPACITY, DEFAULT_GAMMA, DEFAULT_ORDER,
    MAX_ORDER, MIN_ORDER,
};
use crate::ranker::{complete as complete_site, RankerConfig, Suggester};

fn resolver(common: &Common) -> Result<Resolver, Failure> {
    match &common.config {
        Some(path) => read_config(Path::new(path))
            .map(Resolver::new)
            .map_err(|e| Failure::Config(vec![format!("config file {path}: {e}")])),
        None => Ok(Resolver::default()),
    }
}

fn required(r: &mut Resolver, key: &str, flag: Option<String>) -> String {
    let v = r.get_opt(key, flag);
    r.require(v.is_some(), || format!("missing required setting --{key}"));
    v.unwrap_or_default()
}

fn existing(r: &mut Resolver, key: &str, path: &str) {
    r.require(path.is_empty() || Path::new(path).exists(), || {
        format!("--{key}: {path} does not exist")
    });
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parsed<T>(
    r: &mut Resolver,
    key: &str,
    flag: Option<String>,
    default: &str,
    parse: fn(&str) -> Option<T>,
) -> Option<T> {
    let raw = r.get(key, flag, default.to_string());
    let v = parse(&raw);
    r.require(v.is_some(), || format!("--{key}: unrecognized value {raw:?}"));
    v
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn workers(r: &mut Resolver, common: &Common, default: usize) -> usize {
    let n = r.get("workers", common.workers, default);
    r.require(n >= 1, || "--workers must be at least 1".into());
    n
}

fn finish(r: Resolver) -> Result<BTreeMap<String, String>, Failure> {
    let (echo, violations) = r.finish();
    if violations.is_empty() {
        Ok(echo)
    } else {
        Err(Failure::Config(violations))
    }
}

fn in_pool<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Failure::Runtime(crate::Error::Config(e.to_string())))?;
    Ok(pool.install(f))
}

fn manifest_path(common: &Common, output: &Path) -> PathBuf {
    match &common.manifest {
        Some(p) => PathBuf::from(p),
        None => {
            let mut s = output.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
    }
}

fn projects(seqs: &[FunctionSequence]) -> BTreeSet<&str> {
    seqs.iter().map(FunctionSequence::project_id).collect()
}

fn mode_of(seqs: &[FunctionSequence]) -> TokenMode {
    seqs.first().map(|s| s.mode).unwrap_or_default()
}

pub(super) fn extract(a: ExtractArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut r = resolver(&a.common)?;
    let input = required(&mut r, "input", a.input);
    existing(&mut r, "input", &input);
    let output = required(&mut r, "output", a.output);
    let mode = parsed(&mut r, "token-mode", a.token_mode, "full_names", TokenMode::parse);
    let tok = TokenizerConfig {
        mode: mode.unwrap_or_default(),
        include_constructors: r.get("include-constructors", a.include_constructors, false),
        lowercase_subtokens: r.get("lowercase", a.lowercase, true),
        split_method_names: r.get("split-method-names", a.split_method_names, true),
    };
    let n = workers(&mut r, &a.common, default_workers());
    let echo = finish(r)?;

    let ex = in_pool(n, || extract_tree(Path::new(&input), &tok))??;
    for d in &ex.diagnostics {
        warn!("{d}");
    }
    let output = PathBuf::from(output);
    write_sequences(&output, &ex.sequences)?;
    let files: BTreeSet<&str> = ex.sequences.iter().map(|s| s.source_id.as_str()).collect();
    writeln!(
        out,
        "extracted {} sequences from {} files in {} projects ({} diagnostics)",
        ex.sequences.len(),
        files.len(),
        projects(&ex.sequences).len(),
        ex.diagnostics.len()
    )?;
    let mut m = Manifest::new("extract", echo, None);
    m.add_input(Path::new(&input))?;
    m.add_output(&output);
    m.note("sequences", ex.sequences.len());
    m.note("diagnostics", ex.diagnostics.len());
    m.write(&manifest_path(&a.common, &output))?;
    Ok(())
}

pub(super) fn vocab(a: VocabArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut r = resolver(&a.common)?;
    let input = required(&mut r, "input", a.input);
    existing(&mut r, "input", &input);
    let output = required(&mut r, "output", a.output);
    let min_count = r.get_opt("min-count", a.min_count);
    let n = workers(&mut r, &a.common, default_workers());
    let echo = finish(r)?;

    let seqs = read_sequences(Path::new(&input))?;
    let mode = mode_of(&seqs);
    let min_count = min_count.unwrap_or_else(|| default_min_count(mode));
    let vocab = in_pool(n, || Vocabulary::build(&seqs, min_count, mode))??;
    let mut tsv = String::new();
    for (id, tok) in vocab.tokens().iter().enumerate() {
        tsv.push_str(&format!("{id}\t{tok}\t{}\n", vocab.freq(id as u32)));
    }
    let output = PathBuf::from(output);
    fs::write(&output, tsv)?;
    let report = vocab.stats().to_report(mode, min_count);
    write!(out, "{report}")?;
    let mut m = Manifest::new("vocab", echo, None);
    m.add_input(Path::new(&input))?;
    m.add_output(&output);
    for line in report.lines() {
        if let Some((k, v)) = line.split_once('=') {
            m.note(k, v);
        }
    }
    m.write(&manifest_path(&a.common, &output))?;
    Ok(())
}

/// Resolved training input with held-out projects removed.
struct Training {
    input: String,
    output: PathBuf,
    exclude_from: Option<String>,
    sequences: Vec<FunctionSequence>,
    removed: usize,
    min_count: u64,
}

/// Training settings as resolved, before any file is read.
struct TrainSpec {
    input: String,
    output: String,
    min_count: Option<u64>,
    exclude: Vec<String>,
    exclude_from: Option<String>,
}

fn resolve_training(r: &mut Resolver, t: TrainInput) -> TrainSpec {
    let input = required(r, "input", t.input);
    existing(r, "input", &input);
    let output = required(r, "output", t.output);
    let min_count = r.get_opt("min-count", t.min_count);
    let exclude = r
        .get_opt("exclude-projects", t.exclude_projects)
        .map(|s| split_list(&s))
        .unwrap_or_default();
    let exclude_from = r.get_opt("exclude-from", t.exclude_from);
    if let Some(p) = &exclude_from {
        existing(r, "exclude-from", p);
    }
    TrainSpec {
        input,
        output,
        min_count,
        exclude,
        exclude_from,
    }
}

fn load_training(spec: TrainSpec) -> Result<Training, Failure> {
    let TrainSpec {
        input,
        output,
        min_count,
        exclude,
        exclude_from,
    } = spec;
    let mut held_out: BTreeSet<String> = exclude.into_iter().collect();
    if let Some(p) = &exclude_from {
        held_out.extend(read_sequences(Path::new(p))?.iter().map(|s| s.project_id().to_string()));
    }
    let all = read_sequences(Path::new(&input))?;
    let before = all.len();
    let sequences: Vec<FunctionSequence> = all.into_iter().filter(|s| !held_out.contains(s.project_id())).collect();
    let removed = before - sequences.len();
    if removed > 0 {
        info!("removed {removed} sequences of held-out projects from the training input");
    }
    check_disjoint(projects(&sequences), held_out.iter().map(String::as_str))?;
    if sequences.is_empty() {
        return Err(crate::Error::Empty("training sequences").into());
    }
    let min_count = min_count.unwrap_or_else(|| default_min_count(mode_of(&sequences)));
    Ok(Training {
        input,
        output: PathBuf::from(output),
        exclude_from,
        sequences,
        removed,
        min_count,
    })
}

fn training_manifest(mut m: Manifest, t: &Training) -> Result<Manifest, Failure> {
    m.add_input(Path::new(&t.input))?;
    if let Some(p) = &t.exclude_from {
        m.add_input(Path::new(p))?;
    }
    m.add_output(&t.output);
    m.note("training_sequences", t.sequences.len());
    m.note("removed_held_out_sequences", t.removed);
    m.note(
        "training_projects",
        projects(&t.sequences).into_iter().collect::<Vec<_>>().join(","),
    );
    m.note("min_count", t.min_count);
    Ok(m)
}

fn smoothing(r: &mut Resolver, kind: Option<String>, lambda: Option<f64>, discount: Option<f64>) -> SmoothingConfig {
    let d = SmoothingConfig::default();
    let kind = parsed(r, "smoothing", kind, "jm", SmoothingKind::parse).unwrap_or(d.kind);
    let cfg = SmoothingConfig {
        kind,
        lambda: r.get("lambda", lambda, d.lambda),
        discount: r.get("discount", discount, d.discount),
    };
    r.check(cfg.validate());
    cfg
}

pub(super) fn train_ngram(a: TrainNgramArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut r = resolver(&a.common)?;
    let spec = resolve_training(&mut r, a.train);
    let order = r.get("order", a.order, DEFAULT_ORDER);
    r.require((MIN_ORDER..=MAX_ORDER).contains(&order), || {
        format!("--order must be in [{MIN_ORDER}, {MAX_ORDER}], got {order}")
    });
    let smoothing = smoothing(&mut r, a.smoothing, a.lambda, a.discount);
    let n = workers(&mut r, &a.common, default_workers());
    let echo = finish(r)?;

    let t = load_training(spec)?;
    let model = in_pool(n, || -> crate::Result<NGramModel> {
        let vocab = Vocabulary::build(&t.sequences, t.min_count, mode_of(&t.sequences))?;
        NGramModel::train(&t.sequences, order, vocab, smoothing)
    })??;
    model.save(&t.output)?;
    let stats = model.stats();
    write!(out, "{stats}")?;
    let mut m = training_manifest(Manifest::new("train-ngram", echo, None), &t)?;
    for line in stats.lines() {
        if let Some((k, v)) = line.split_once('=') {
            m.note(k, v);
        }
    }
    m.write(&manifest_path(&a.common, &t.output))?;
    Ok(())
}

pub(super) fn train_pv(a: TrainPvArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut r = resolver(&a.common)?;
    let spec = resolve_training(&mut r, a.train);
    let d = HyperParams::default();
    let mut hyper = HyperParams {
        dim: r.get("dim", a.dim, d.dim),
        window: r.get("window", a.window, d.window),
        min_count: 0,
        epochs: r.get("epochs", a.epochs, d.epochs),
        alpha0: r.get("alpha0", a.alpha0, d.alpha0),
        alpha_min: r.get("alpha-min", a.alpha_min, d.alpha_min),
        seed: r.get("seed", a.seed, d.seed),
        infer_steps: r.get("infer-steps", a.infer_steps, d.infer_steps),
        workers: workers(&mut r, &a.common, 1),
    };
    r.check(hyper.validate());
    let echo = finish(r)?;

    let t = load_training(spec)?;
    hyper.min_count = t.min_count;
    let model = PvModel::train(&t.sequences, &hyper)?;
    model.save(&t.output)?;
    writeln!(
        out,
        "trained {} document vectors of dimension {} over {} types",
        model.num_docs(),
        model.dim(),
        model.vocab().len()
    )?;
    let mut m = training_manifest(Manifest::new("train-pv", echo, Some(hyper.seed)), &t)?;
    m.note("documents", model.num_docs());
    m.note("vocab_size", model.vocab().len());
    m.write(&manifest_path(&a.common, &t.output))?;
    Ok(())
}

pub(super) fn gen_callsites(a: GenCallsitesArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut r = resolver(&a.common)?;
    let input = required(&mut r, "input", a.input);
    existing(&mut r, "input", &input);
    let output = required(&mut r, "output", a.output);
    let train = r.get_opt("train", a.train);
    if let Some(p) = &train {
        existing(&mut r, "train", p);
    }
    let echo = finish(r)?;

    let test = read_sequences(Path::new(&input))?;
    if let Some(p) = &train {
        let train_seqs = read_sequences(Path::new(p))?;
        check_disjoint(projects(&train_seqs), projects(&test))?;
    }
    let source = NaiveCandidates::from_sequences(&test);
    let set = synthesize_call_sites(&test, &source);
    let output = PathBuf::from(output);
    write_callsites(&output, &set.records)?;
    writeln!(
        out,
        "{} call sites, {} excluded (gold not among candidates), candidates: {}",
        set.len(),
        set.excluded,
        source.label()
    )?;
    let mut m = Manifest::new("gen-callsites", echo, None);
    m.add_input(Path::new(&input))?;
    if let Some(p) = &train {
        m.add_input(Path::new(p))?;
    }
    m.add_output(&output);
    m.note("sites", set.len());
    m.note("excluded", set.excluded);
    m.note("candidate_source", source.label());
    m.write(&manifest_path(&a.common, &output))?;
    Ok(())
}

struct Ranking {
    ranker: RankerConfig,
    gamma: f64,
    capacity: usize,
    scope: CacheScope,
}

fn ranking(r: &mut Resolver, a: RankArgs) -> Ranking {
    let d = RankerConfig::default();
    let ranker = RankerConfig {
        max_size: r.get("max-size", a.max_size, d.max_size),
        sim_threshold: r.get("sim-threshold", a.sim_threshold, d.sim_threshold),
        neighbor_budget: r.get("neighbor-budget", a.neighbor_budget, d.neighbor_budget),
        fill_tail: r.get("fill-tail", a.fill_tail, d.fill_tail),
        skip_context: r.get("skip-context", a.skip_context, d.skip_context),
    };
    r.check(ranker.validate());
    let gamma = r.get("cache-gamma", a.cache_gamma, DEFAULT_GAMMA);
    let capacity = r.get("cache-capacity", a.cache_capacity, DEFAULT_CAPACITY);
    r.check(CacheState::new(MIN_ORDER, gamma, capacity).map(|_| ()));
    let scope = parsed(r, "cache-scope", a.cache_scope, "file", CacheScope::parse).unwrap_or(CacheScope::File);
    Ranking {
        ranker,
        gamma,
        capacity,
        scope,
    }
}

fn optional_path(r: &mut Resolver, key: &str, flag: Option<String>) -> Option<String> {
    let v = r.get_opt(key, flag);
    if let Some(p) = &v {
        existing(r, key, p);
    }
    v
}

pub(super) fn complete(a: CompleteArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut r = resolver(&a.common)?;
    let rk = ranking(&mut r, a.rank);
    let pv = optional_path(&mut r, "pv", a.pv);
    let ngram = optional_path(&mut r, "ngram", a.ngram);
    let cache = r.get("cache", a.cache, false);
    let sites = optional_path(&mut r, "sites", a.sites);
    let site_id = r.get_opt("site-id", a.site_id);
    let context = r.get_opt("context", a.context);
    let candidates = r.get_opt("candidates", a.candidates);
    let neighbors = r.get_opt("neighbors", a.neighbors);
    r.require(pv.is_some() != ngram.is_some(), || {
        "give exactly one of --pv and --ngram".into()
    });
    r.require(!cache || ngram.is_some(), || "--cache needs --ngram".into());
    r.require(sites.is_some() != context.is_some(), || {
        "give exactly one of --sites and --context".into()
    });
    r.require(context.is_none() || candidates.is_some(), || {
        "--context needs --candidates".into()
    });
    r.require(site_id.is_none() || sites.is_some(), || {
        "--site-id needs --sites".into()
    });
    r.require(neighbors.is_none() || pv.is_some(), || "--neighbors needs --pv".into());
    let echo = finish(r)?;

    let mut records: Vec<CallSiteRecord> = match (&sites, &context) {
        (Some(path), _) => read_callsites(Path::new(path))?,
        (None, Some(ctx)) => {
            let mut cands = split_list(candidates.as_deref().unwrap_or_default());
            cands.sort();
            cands.dedup();
            vec![CallSiteRecord {
                site_id: "cli".into(),
                project_id: String::new(),
                file_id: String::new(),
                context: split_list(ctx),
                gold: String::new(),
                candidates: cands,
            }]
        }
        (None, None) => Vec::new(),
    };
    if let Some(id) = &site_id {
        let pos = records
            .iter()
            .position(|s| &s.site_id == id)
            .ok_or_else(|| crate::Error::Config(format!("no call site {id:?} in the sites file")))?;
        if !cache {
            records = vec![records.swap_remove(pos)];
        }
    }
    for rec in &records {
        rec.validate()?;
    }

    let pv_model = pv.as_deref().map(|p| PvModel::load(Path::new(p))).transpose()?;
    let ngram_model = ngram.as_deref().map(|p| NGramModel::load(Path::new(p))).transpose()?;
    let mut suggester = match (&pv_model, &ngram_model) {
        (Some(m), _) => Suggester::Pv(m),
        (None, Some(m)) if cache => Suggester::NGramCache {
            model: m,
            cache: CacheState::new(m.order(), rk.gamma, rk.capacity)?,
            scope: rk.scope,
        },
        (None, Some(m)) => Suggester::NGram(m),
        (None, None) => Suggester::Alphabetical,
    };
    for rec in &records {
        let c = complete_site(rec, &mut suggester, &rk.ranker);
        if site_id.as_ref().is_some_and(|id| id != &rec.site_id) {
            continue;
        }
        writeln!(
            out,
            "# {} gold={} latency_ms={:.3}",
            rec.site_id,
            rec.gold,
            c.latency.as_secs_f64() * 1e3
        )?;
        if c.all_oov {
            writeln!(out, "# no context token is in the model vocabulary")?;
        }
        for (i, s) in c.list.items.iter().enumerate() {
            writeln!(out, "{}\t{}\t{:.6}", i + 1, s.token, s.score)?;
        }
        if let (Some(k), Some(m)) = (neighbors, &pv_model) {
            let refs: Vec<&str> = rec.context.iter().map(String::as_str).collect();
            let inferred = m.infer_vector(&refs, m.hyper().infer_steps);
            if !inferred.all_dropped && k > 0 {
                for hit in m.most_similar(&inferred.vector, k)? {
                    let doc = m.doc(hit.doc_id);
                    let toks: Vec<&str> = doc.ids.iter().map(|&id| m.vocab().token(id)).collect();
                    writeln!(out, "~\t{:.6}\t{}\t{}", hit.score, doc.source_id, toks.join(" "))?;
                }
            }
        }
    }
    if let Some(p) = &a.common.manifest {
        let mut m = Manifest::new("complete", echo, None);
        for input in [&pv, &ngram, &sites].into_iter().flatten() {
            m.add_input(Path::new(input))?;
        }
        m.write(Path::new(p))?;
    }
    Ok(())
}

pub(super) fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut r = resolver(&a.common)?;
    let rk = ranking(&mut r, a.rank);
    let sites = required(&mut r, "sites", a.sites);
    existing(&mut r, "sites", &sites);
    let pv = optional_path(&mut r, "pv", a.pv);
    let ngram = optional_path(&mut r, "ngram", a.ngram);
    let train = optional_path(&mut r, "train", a.train);
    let output_dir = required(&mut r, "output-dir", a.output_dir);
    let ks_raw = r.get("ks", a.ks, "1,3,5,10".to_string());
    let ks: Vec<usize> = split_list(&ks_raw).iter().filter_map(|k| k.parse().ok()).collect();
    r.require(
        !ks.is_empty() && ks.len() == split_list(&ks_raw).len() && ks.iter().all(|&k| k >= 1),
        || format!("--ks must be positive integers, got {ks_raw:?}"),
    );
    let label = r.get(
        "candidate-source",
        a.candidate_source,
        NaiveCandidates::default().label().to_string(),
    );
    let n = workers(&mut r, &a.common, default_workers());
    let echo = finish(r)?;

    let records = read_callsites(Path::new(&sites))?;
    for rec in &records {
        rec.validate()?;
    }
    let test_projects: BTreeSet<&str> = records.iter().map(|s| s.project_id.as_str()).collect();
    let pv_model = pv.as_deref().map(|p| PvModel::load(Path::new(p))).transpose()?;
    let ngram_model = ngram.as_deref().map(|p| NGramModel::load(Path::new(p))).transpose()?;
    let mut overlap = Vec::new();
    if let Some(m) = &pv_model {
        let trained: BTreeSet<&str> = m
            .docs()
            .iter()
            .map(|d| crate::corpus::project_of(&d.source_id))
            .collect();
        if let Err(e) = check_disjoint(trained, test_projects.iter().copied()) {
            overlap.push(format!("pv model: {e}"));
        }
    }
    if let Some(p) = &train {
        let seqs = read_sequences(Path::new(p))?;
        if let Err(e) = check_disjoint(projects(&seqs), test_projects.iter().copied()) {
            overlap.push(format!("training sequences: {e}"));
        }
    }
    if !overlap.is_empty() {
        return Err(Failure::Config(overlap));
    }

    let set = BenchmarkSet::from_records(records, label);
    let cfg = BenchConfig {
        ranker: rk.ranker,
        ks,
        cache_gamma: rk.gamma,
        cache_capacity: rk.capacity,
        cache_scope: rk.scope,
    };
    let systems = Systems {
        pv: pv_model.as_ref(),
        ngram: ngram_model.as_ref(),
    };
    let result = in_pool(n, || evaluate(&set, systems, &cfg))??;
    let (md, csv) = compare_report(&result.report);
    let dir = PathBuf::from(output_dir);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("compare.md"), &md)?;
    fs::write(dir.join("compare.csv"), &csv)?;
    fs::write(dir.join("latency.csv"), crate::eval::latency_report(&result.report))?;
    write!(out, "{md}")?;
    let mut m = Manifest::new("bench", echo, pv_model.as_ref().map(|p| p.hyper().seed));
    for input in [Some(&sites), pv.as_ref(), ngram.as_ref(), train.as_ref()]
        .into_iter()
        .flatten()
    {
        m.add_input(Path::new(input))?;
    }
    for f in ["compare.md", "compare.csv", "latency.csv"] {
        m.add_output(&dir.join(f));
    }
    m.note("sites", set.len());
    m.note("excluded", set.excluded);
    for run in &result.runs {
        if run.all_oov > 0 {
            m.note(&format!("{}_all_oov_sites", run.label), run.all_oov);
        }
    }
    m.note("violations", result.violations.len());
    m.write(
        &a.common
            .manifest
            .as_ref()
            .map(PathBuf::from)
            .unwrap_or_else(|| dir.join("manifest.json")),
    )?;
    if result.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariants(result.violations))
    }
}

pub(super) fn entropy(a: EntropyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut r = resolver(&a.common)?;
    let train = required(&mut r, "train", a.train);
    existing(&mut r, "train", &train);
    let test = required(&mut r, "test", a.test);
    existing(&mut r, "test", &test);
    let output = required(&mut r, "output", a.output);
    let lo = r.get("min-order", a.min_order, MIN_ORDER);
    let hi = r.get("max-order", a.max_order, MAX_ORDER);
    r.require(MIN_ORDER <= lo && lo <= hi && hi <= MAX_ORDER, || {
        format!("order range must satisfy {MIN_ORDER} <= min-order <= max-order <= {MAX_ORDER}, got [{lo}, {hi}]")
    });
    let modes_raw = r.get("modes", a.modes, "full_names,subtokens".to_string());
    let modes: Vec<TokenMode> = split_list(&modes_raw)
        .iter()
        .filter_map(|m| TokenMode::parse(m))
        .collect();
    r.require(!modes.is_empty() && modes.len() == split_list(&modes_raw).len(), || {
        format!("--modes: unrecognized value {modes_raw:?}")
    });
    let oov_raw = r.get("oov", a.oov, "include,exclude".to_string());
    let oov_modes: Vec<OovMode> = match oov_raw.as_str() {
        "both" => vec![OovMode::Include, OovMode::Exclude],
        s => split_list(s).iter().filter_map(|m| OovMode::parse(m)).collect(),
    };
    r.require(!oov_modes.is_empty(), || {
        format!("--oov: unrecognized value {oov_raw:?}")
    });
    let smoothing = smoothing(&mut r, a.smoothing, a.lambda, a.discount);
    let cfg = EntropyConfig {
        orders: lo..=hi,
        modes,
        oov_modes,
        smoothing,
        min_count_full: r.get_opt("min-count-full", a.min_count_full),
        min_count_subtokens: r.get_opt("min-count-subtokens", a.min_count_subtokens),
        lowercase_subtokens: r.get("lowercase", a.lowercase, true),
        split_method_names: r.get("split-method-names", a.split_method_names, true),
    };
    let n = workers(&mut r, &a.common, default_workers());
    let echo = finish(r)?;

    let train_seqs = read_sequences(Path::new(&train))?;
    let test_seqs = read_sequences(Path::new(&test))?;
    check_disjoint(projects(&train_seqs), projects(&test_seqs))?;
    for (name, seqs) in [("train", &train_seqs), ("test", &test_seqs)] {
        if mode_of(seqs) != TokenMode::FullNames {
            return Err(Failure::Config(vec![format!("--{name} must hold full-name sequences")]));
        }
    }
    let rows = in_pool(n, || entropy_rows(&train_seqs, &test_seqs, &cfg))??;
    let csv = entropy_csv(&rows);
    let output = PathBuf::from(output);
    fs::write(&output, &csv)?;
    write!(out, "{csv}")?;
    let mut m = Manifest::new("entropy", echo, None);
    m.add_input(Path::new(&train))?;
    m.add_input(Path::new(&test))?;
    m.add_output(&output);
    m.note("rows", rows.len());
    m.write(&manifest_path(&a.common, &output))?;
    Ok(())
}
