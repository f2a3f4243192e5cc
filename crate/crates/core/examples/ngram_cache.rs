//! A cache over the current file lets the n-gram model predict calls it never saw in training.

use callrank::candidates::{synthesize_call_sites, NaiveCandidates};
use callrank::corpus::{TokenMode, Vocabulary};
use callrank::eval::{compare_report, evaluate, BenchConfig, Systems};
use callrank::ngram::{CacheScope, NGramModel, SmoothingConfig};
use callrank::synth::{Layout, PlantedCorpus, SynthConfig};

fn main() -> callrank::Result<()> {
    let mut g = PlantedCorpus::new(&SynthConfig::default())?;
    let train = g.corpus(
        Layout {
            projects: 10,
            files_per_project: 20,
            methods_per_file: 10,
        },
        "train",
    );
    let test = g.corpus_with_local_idioms(
        Layout {
            projects: 2,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "local",
    );
    let vocab = Vocabulary::build(&train, 20, TokenMode::FullNames)?;
    let model = NGramModel::train(&train, 5, vocab, SmoothingConfig::default())?;
    let sites = synthesize_call_sites(&test, &NaiveCandidates::from_sequences(&test));

    for scope in [CacheScope::File, CacheScope::Project] {
        let cfg = BenchConfig {
            cache_scope: scope,
            ..BenchConfig::default()
        };
        let res = evaluate(
            &sites,
            Systems {
                pv: None,
                ngram: Some(&model),
            },
            &cfg,
        )?;
        println!("cache scope: {}\n{}", scope.as_str(), compare_report(&res.report).0);
    }
    Ok(())
}
