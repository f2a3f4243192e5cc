//! The `callrank` command line: argument definitions and dispatch.

mod commands;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};

const CONFIG_HELP: &str = "\
Every long flag of a subcommand may also be set in the file given to --config, \
one `key = value` per line (`#` starts a comment, `_` and `-` are interchangeable \
in keys). Flags override the file; unknown keys are rejected. Lists are comma separated.";

#[derive(Debug, Parser)]
#[command(name = "callrank", version, about = "Rank function-call completions with n-gram and paragraph-vector models", after_help = CONFIG_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract method call sequences from a source tree.
    Extract(ExtractArgs),
    /// Count tokens and write the vocabulary after the min-count cut-off.
    Vocab(VocabArgs),
    /// Train an n-gram model on a sequence file.
    TrainNgram(TrainNgramArgs),
    /// Train a PV-DBOW model on a sequence file.
    TrainPv(TrainPvArgs),
    /// Turn held-out sequences into call-site records with naive candidates.
    GenCallsites(GenCallsitesArgs),
    /// Rank candidates for one call site, or every site of a file.
    Complete(CompleteArgs),
    /// Evaluate baseline, pv, ngram and ngram_cache on a call-site file.
    Bench(BenchArgs),
    /// Cross-entropy of held-out projects for orders and token modes.
    Entropy(EntropyArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct Common {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Worker threads [default: available cores; 1 for train-pv].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Manifest path [default: next to the main output].
    #[arg(long)]
    pub manifest: Option<String>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub common: Common,
    /// Root directory; its first-level entries are projects.
    #[arg(long)]
    pub input: Option<String>,
    /// Sequence file to write.
    #[arg(long)]
    pub output: Option<String>,
    /// full_names or subtokens [default: full_names].
    #[arg(long)]
    pub token_mode: Option<String>,
    /// Record `new T(...)` as a call to `T` [default: false].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub include_constructors: Option<bool>,
    /// Lowercase subtokens [default: true].
    #[arg(long)]
    pub lowercase: Option<bool>,
    /// Split method names into subtokens too [default: true].
    #[arg(long)]
    pub split_method_names: Option<bool>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct VocabArgs {
    #[command(flatten)]
    pub common: Common,
    /// Sequence file.
    #[arg(long)]
    pub input: Option<String>,
    /// Vocabulary TSV to write (`id`, `token`, `count`).
    #[arg(long)]
    pub output: Option<String>,
    /// Minimum count [default: 20 for full names, 5 for subtokens].
    #[arg(long)]
    pub min_count: Option<u64>,
}

/// Training inputs shared by both model kinds.
#[derive(Debug, Clone, Args, Default)]
pub struct TrainInput {
    /// Training sequence file.
    #[arg(long)]
    pub input: Option<String>,
    /// Model file to write.
    #[arg(long)]
    pub output: Option<String>,
    /// Minimum count [default: 20 for full names, 5 for subtokens].
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Held-out project ids removed from the training input.
    #[arg(long)]
    pub exclude_projects: Option<String>,
    /// Sequence file whose projects are removed from the training input.
    #[arg(long)]
    pub exclude_from: Option<String>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct TrainNgramArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub train: TrainInput,
    /// Model order in [2, 10] [default: 5].
    #[arg(long)]
    pub order: Option<usize>,
    /// mle, jm or kn [default: jm].
    #[arg(long)]
    pub smoothing: Option<String>,
    /// Jelinek-Mercer weight in (0, 1) [default: 0.5].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Kneser-Ney discount in (0, 1) [default: 0.75].
    #[arg(long)]
    pub discount: Option<f64>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct TrainPvArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub train: TrainInput,
    /// Vector size [default: 300].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Context window [default: 15].
    #[arg(long)]
    pub window: Option<usize>,
    /// Passes over the corpus [default: 20].
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Initial learning rate [default: 0.025].
    #[arg(long)]
    pub alpha0: Option<f32>,
    /// Final learning rate [default: 0.0001].
    #[arg(long)]
    pub alpha_min: Option<f32>,
    /// Random seed [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inference epochs for unseen contexts [default: 50].
    #[arg(long)]
    pub infer_steps: Option<usize>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct GenCallsitesArgs {
    #[command(flatten)]
    pub common: Common,
    /// Held-out sequence file.
    #[arg(long)]
    pub input: Option<String>,
    /// Call-site JSONL to write.
    #[arg(long)]
    pub output: Option<String>,
    /// Training sequence file checked for project overlap.
    #[arg(long)]
    pub train: Option<String>,
}

/// Ranking options shared by `complete` and `bench`.
#[derive(Debug, Clone, Args, Default)]
pub struct RankArgs {
    /// Suggestions per site [default: 10].
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Lowest neighbor cosine walked [default: 0.25].
    #[arg(long)]
    pub sim_threshold: Option<f64>,
    /// Neighbors fetched and temporary-list cap [default: 100].
    #[arg(long)]
    pub neighbor_budget: Option<usize>,
    /// Pad lists with remaining candidates [default: false].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub fill_tail: Option<bool>,
    /// Skip calls already in the context when walking neighbors [default: false].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub skip_context: Option<bool>,
    /// Cache mixing weight [default: 0.5].
    #[arg(long)]
    pub cache_gamma: Option<f64>,
    /// Cached n-grams kept per scope [default: 10000].
    #[arg(long)]
    pub cache_capacity: Option<usize>,
    /// file or project [default: file].
    #[arg(long)]
    pub cache_scope: Option<String>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct CompleteArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub rank: RankArgs,
    /// PV model file.
    #[arg(long)]
    pub pv: Option<String>,
    /// N-gram model file.
    #[arg(long)]
    pub ngram: Option<String>,
    /// Mix an n-gram cache over the sites in file order [default: false].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub cache: Option<bool>,
    /// Call-site JSONL.
    #[arg(long)]
    pub sites: Option<String>,
    /// Only this site of --sites.
    #[arg(long)]
    pub site_id: Option<String>,
    /// Method name and preceding calls, comma separated.
    #[arg(long)]
    pub context: Option<String>,
    /// Candidate calls for --context, comma separated.
    #[arg(long)]
    pub candidates: Option<String>,
    /// Also print this many nearest training sequences (PV only).
    #[arg(long)]
    pub neighbors: Option<usize>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub rank: RankArgs,
    /// Call-site JSONL.
    #[arg(long)]
    pub sites: Option<String>,
    /// PV model file.
    #[arg(long)]
    pub pv: Option<String>,
    /// N-gram model file; enables ngram and ngram_cache.
    #[arg(long)]
    pub ngram: Option<String>,
    /// Training sequence file checked for project overlap.
    #[arg(long)]
    pub train: Option<String>,
    /// Directory for compare.md, compare.csv, latency.csv and manifest.json.
    #[arg(long)]
    pub output_dir: Option<String>,
    /// Recall cut-offs [default: 1,3,5,10].
    #[arg(long)]
    pub ks: Option<String>,
    /// Candidate source named in the report.
    #[arg(long)]
    pub candidate_source: Option<String>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Training sequence file (full names).
    #[arg(long)]
    pub train: Option<String>,
    /// Held-out sequence file (full names).
    #[arg(long)]
    pub test: Option<String>,
    /// CSV to write.
    #[arg(long)]
    pub output: Option<String>,
    /// Lowest order [default: 2].
    #[arg(long)]
    pub min_order: Option<usize>,
    /// Highest order [default: 10].
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Token modes [default: full_names,subtokens].
    #[arg(long)]
    pub modes: Option<String>,
    /// include, exclude or both [default: include,exclude].
    #[arg(long)]
    pub oov: Option<String>,
    /// mle, jm or kn [default: jm].
    #[arg(long)]
    pub smoothing: Option<String>,
    /// Jelinek-Mercer weight in (0, 1) [default: 0.5].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Kneser-Ney discount in (0, 1) [default: 0.75].
    #[arg(long)]
    pub discount: Option<f64>,
    /// Full-name minimum count [default: 20].
    #[arg(long)]
    pub min_count_full: Option<u64>,
    /// Subtoken minimum count [default: 5].
    #[arg(long)]
    pub min_count_subtokens: Option<u64>,
    /// Lowercase subtokens [default: true].
    #[arg(long)]
    pub lowercase: Option<bool>,
    /// Split method names into subtokens too [default: true].
    #[arg(long)]
    pub split_method_names: Option<bool>,
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration, one line per violation.
    Config(Vec<String>),
    /// Outputs were written but checks failed, one line per violation.
    Invariants(Vec<String>),
    Runtime(crate::Error),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Invariants(_) | Failure::Runtime(_) => 1,
        }
    }

    pub fn lines(&self) -> Vec<String> {
        match self {
            Failure::Config(v) | Failure::Invariants(v) => v.clone(),
            Failure::Runtime(e) => vec![e.to_string()],
        }
    }
}

/// Run a parsed command, writing results to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Extract(a) => commands::extract(a, out),
        Command::Vocab(a) => commands::vocab(a, out),
        Command::TrainNgram(a) => commands::train_ngram(a, out),
        Command::TrainPv(a) => commands::train_pv(a, out),
        Command::GenCallsites(a) => commands::gen_callsites(a, out),
        Command::Complete(a) => commands::complete(a, out),
        Command::Bench(a) => commands::bench(a, out),
        Command::Entropy(a) => commands::entropy(a, out),
    }
}

/// Parse `args` (program name first), run, and return the exit code.
/// Diagnostics go to `err`, one line each.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            for line in f.lines() {
                let _ = writeln!(err, "error: {line}");
            }
            f.exit_code()
        }
    }
}
