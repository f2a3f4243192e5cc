use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::metrics::{mrr, recall_at_k, Outcome};
use crate::error::Result;

pub const DEFAULT_KS: [usize; 4] = [1, 3, 5, 10];

/// Scores of one system on one set of call sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub sites: usize,
    /// `(k, R@k)` in ascending `k`.
    pub recall: Vec<(usize, f64)>,
    pub mrr: f64,
    /// Fraction of sites whose gold appears anywhere in the list.
    pub recall_any: f64,
    pub mean_latency_ms: f64,
    pub median_latency_ms: f64,
}

impl Scores {
    pub fn compute(outcomes: &[Outcome], latencies_ms: &[f64], ks: &[usize]) -> Result<Self> {
        let mut ks = ks.to_vec();
        ks.sort_unstable();
        ks.dedup();
        let recall = ks
            .iter()
            .map(|&k| Ok((k, recall_at_k(outcomes, k)?)))
            .collect::<Result<Vec<_>>>()?;
        let any = outcomes.iter().filter(|o| o.rank().is_some()).count() as f64 / outcomes.len() as f64;
        let (mean, median) = latency_summary(latencies_ms);
        Ok(Self {
            sites: outcomes.len(),
            recall,
            mrr: mrr(outcomes)?,
            recall_any: any,
            mean_latency_ms: mean,
            median_latency_ms: median,
        })
    }

    pub fn recall_at(&self, k: usize) -> Option<f64> {
        self.recall.iter().find(|(x, _)| *x == k).map(|(_, r)| *r)
    }

    fn violations(&self, label: &str, out: &mut Vec<String>) {
        for w in self.recall.windows(2) {
            if w[1].1 < w[0].1 {
                out.push(format!(
                    "{label}: R@{} = {} < R@{} = {}",
                    w[1].0, w[1].1, w[0].0, w[0].1
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.mrr) {
            out.push(format!("{label}: MRR {} outside [0, 1]", self.mrr));
        }
        if self.mrr > self.recall_any + 1e-12 {
            out.push(format!("{label}: MRR {} exceeds R@inf {}", self.mrr, self.recall_any));
        }
    }
}

fn latency_summary(ms: &[f64]) -> (f64, f64) {
    if ms.is_empty() {
        return (0.0, 0.0);
    }
    let mean = ms.iter().sum::<f64>() / ms.len() as f64;
    let mut sorted = ms.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    (mean, median)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectReport {
    pub project: String,
    pub sites: usize,
    pub excluded: usize,
    pub coverage: Option<f64>,
    /// Keyed by system label; a system that did not run is absent.
    pub scores: BTreeMap<String, Scores>,
}

/// Per-project scores for a set of systems, in a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub ks: Vec<usize>,
    pub systems: Vec<String>,
    pub candidate_source: String,
    pub projects: Vec<ProjectReport>,
}

impl EvalReport {
    /// Invariant violations, one line each; empty when the report is sound.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.projects {
            for (label, s) in &p.scores {
                s.violations(&format!("{}/{}", p.project, label), &mut out);
            }
            if let Some(c) = p.coverage {
                if !(0.0..=1.0).contains(&c) {
                    out.push(format!("{}: coverage {c} outside [0, 1]", p.project));
                }
            }
        }
        out
    }

    pub fn project(&self, name: &str) -> Option<&ProjectReport> {
        self.projects.iter().find(|p| p.project == name)
    }

    fn headline_k(&self) -> usize {
        if self.ks.contains(&10) {
            10
        } else {
            *self.ks.iter().max().unwrap_or(&10)
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    None,
    Best,
    Second,
}

/// Best and second-best distinct values among present cells.
fn marks(values: &[Option<f64>]) -> Vec<Mark> {
    let mut distinct: Vec<f64> = values.iter().flatten().copied().collect();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    values
        .iter()
        .map(|v| match v {
            Some(x) if distinct.first() == Some(x) => Mark::Best,
            Some(x) if distinct.get(1) == Some(x) => Mark::Second,
            _ => Mark::None,
        })
        .collect()
}

fn md_cell(v: Option<f64>, mark: Mark, percent: bool) -> String {
    let Some(v) = v else {
        return "-".into();
    };
    let s = if percent {
        format!("{:.2}", v * 100.0)
    } else {
        format!("{v:.3}")
    };
    match mark {
        Mark::Best => format!("**{s}**"),
        Mark::Second => format!("<u>{s}</u>"),
        Mark::None => s,
    }
}

fn mark_name(m: Mark) -> &'static str {
    match m {
        Mark::Best => "best",
        Mark::Second => "second",
        Mark::None => "",
    }
}

/// Side-by-side table of R@k and MRR per project and system, as markdown
/// and CSV. Latency is left out so the output depends only on the inputs.
pub fn compare_report(report: &EvalReport) -> (String, String) {
    let k = report.headline_k();
    let mut md = String::new();
    let _ = writeln!(md, "Candidate lists: {}", report.candidate_source);
    let _ = writeln!(md);
    let _ = write!(md, "| project | sites | excluded |");
    for s in &report.systems {
        let _ = write!(md, " {s} R@{k} | {s} MRR |");
    }
    let _ = writeln!(md);
    let _ = write!(md, "|---|---:|---:|");
    for _ in &report.systems {
        let _ = write!(md, "---:|---:|");
    }
    let _ = writeln!(md);

    let mut csv = String::from("project,system,sites,excluded,coverage");
    for k in &report.ks {
        let _ = write!(csv, ",r@{k}");
    }
    let _ = writeln!(csv, ",mrr,r@{k}_mark,mrr_mark,candidate_source");

    for p in &report.projects {
        let r: Vec<Option<f64>> = report
            .systems
            .iter()
            .map(|s| p.scores.get(s).and_then(|x| x.recall_at(k)))
            .collect();
        let m: Vec<Option<f64>> = report.systems.iter().map(|s| p.scores.get(s).map(|x| x.mrr)).collect();
        let (rm, mm) = (marks(&r), marks(&m));
        let _ = write!(md, "| {} | {} | {} |", p.project, p.sites, p.excluded);
        for i in 0..report.systems.len() {
            let _ = write!(
                md,
                " {} | {} |",
                md_cell(r[i], rm[i], true),
                md_cell(m[i], mm[i], false)
            );
        }
        let _ = writeln!(md);

        let coverage = p.coverage.map(|c| format!("{c:.6}")).unwrap_or_default();
        for (i, system) in report.systems.iter().enumerate() {
            let _ = write!(csv, "{},{},{},{},{}", p.project, system, p.sites, p.excluded, coverage);
            match p.scores.get(system) {
                Some(s) => {
                    for k in &report.ks {
                        let _ = write!(
                            csv,
                            ",{}",
                            s.recall_at(*k).map(|x| format!("{x:.6}")).unwrap_or_default()
                        );
                    }
                    let _ = write!(csv, ",{:.6}", s.mrr);
                }
                None => {
                    for _ in &report.ks {
                        csv.push(',');
                    }
                    csv.push(',');
                }
            }
            let _ = writeln!(
                csv,
                ",{},{},\"{}\"",
                mark_name(rm[i]),
                mark_name(mm[i]),
                report.candidate_source.replace('"', "\"\"")
            );
        }
    }
    let _ = writeln!(md);
    let _ = writeln!(md, "R@{k} in percent. Bold: best; underlined: second best.");
    (md, csv)
}

/// Mean and median `complete` latency per project and system, as CSV.
pub fn latency_report(report: &EvalReport) -> String {
    let mut csv = String::from("project,system,sites,mean_ms,median_ms\n");
    for p in &report.projects {
        for system in &report.systems {
            if let Some(s) = p.scores.get(system) {
                let _ = writeln!(
                    csv,
                    "{},{},{},{:.4},{:.4}",
                    p.project, system, s.sites, s.mean_latency_ms, s.median_latency_ms
                );
            }
        }
    }
    csv
}
