//! Recall@k, MRR, entropy curves and the system comparison harness.

mod bench;
mod entropy;
mod metrics;
mod report;

pub use bench::{evaluate, BenchConfig, BenchResult, SystemRun, Systems, POOLED};
pub use entropy::{entropy_csv, entropy_rows, EntropyConfig, EntropyRow, OovMode};
pub use metrics::{mrr, recall_at_k, Outcome};
pub use report::{compare_report, latency_report, EvalReport, ProjectReport, Scores, DEFAULT_KS};
