//! End-to-end benchmark on planted concepts: train both models, synthesize
//! call sites from held-out projects and compare every suggester.
//!
//! `cargo run --release --example planted_benchmark [dim] [skip_context]`

use std::time::Instant;

use callrank::candidates::{check_disjoint, synthesize_call_sites, NaiveCandidates};
use callrank::corpus::{TokenMode, Vocabulary};
use callrank::embedding::{HyperParams, PvModel};
use callrank::eval::{compare_report, evaluate, BenchConfig, Systems};
use callrank::ngram::{NGramModel, SmoothingConfig};
use callrank::synth::{Layout, PlantedCorpus, SynthConfig};

fn main() -> callrank::Result<()> {
    let mut args = std::env::args().skip(1);
    let dim = args.next().and_then(|a| a.parse().ok()).unwrap_or(64);
    let skip_context = args.next().is_some_and(|a| a == "true");

    let mut g = PlantedCorpus::new(&SynthConfig::default())?;
    let train = g.corpus(
        Layout {
            projects: 20,
            files_per_project: 25,
            methods_per_file: 10,
        },
        "train",
    );
    let test = g.corpus(
        Layout {
            projects: 5,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "test",
    );
    check_disjoint(
        train.iter().map(|s| s.project_id()),
        test.iter().map(|s| s.project_id()),
    )?;

    let t = Instant::now();
    let pv = PvModel::train(
        &train,
        &HyperParams {
            dim,
            ..HyperParams::default()
        },
    )?;
    println!("pv: {} docs, dim {dim}, {:.2?}", pv.num_docs(), t.elapsed());
    let vocab = Vocabulary::build(&train, 20, TokenMode::FullNames)?;
    let ngram = NGramModel::train(&train, 5, vocab, SmoothingConfig::default())?;

    let sites = synthesize_call_sites(&test, &NaiveCandidates::from_sequences(&test));
    let mut cfg = BenchConfig::default();
    cfg.ranker.skip_context = skip_context;
    let res = evaluate(
        &sites,
        Systems {
            pv: Some(&pv),
            ngram: Some(&ngram),
        },
        &cfg,
    )?;
    println!("{} call sites, {} excluded\n", sites.len(), sites.excluded);
    println!("{}", compare_report(&res.report).0);
    for run in &res.runs {
        let mean = run.latencies_ms.iter().sum::<f64>() / run.latencies_ms.len().max(1) as f64;
        println!("{:<12} mean latency {mean:.3} ms", run.label);
    }
    println!("violations: {}", res.violations.len());
    Ok(())
}
