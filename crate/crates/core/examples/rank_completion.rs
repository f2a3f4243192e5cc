//! Complete one call site with every suggester.

use callrank::candidates::CallSiteRecord;
use callrank::corpus::{TokenMode, Vocabulary};
use callrank::embedding::{HyperParams, PvModel};
use callrank::ngram::{CacheScope, CacheState, NGramModel, SmoothingConfig};
use callrank::ranker::{complete, RankerConfig, Suggester};
use callrank::synth::{Layout, PlantedCorpus, SynthConfig};

fn main() -> callrank::Result<()> {
    let mut g = PlantedCorpus::new(&SynthConfig::default())?;
    let train = g.corpus(
        Layout {
            projects: 10,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "train",
    );
    let concept = g.concepts()[0].clone();
    let pv = PvModel::train(
        &train,
        &HyperParams {
            dim: 64,
            min_count: 5,
            ..HyperParams::default()
        },
    )?;
    let vocab = Vocabulary::build(&train, 5, TokenMode::FullNames)?;
    let ngram = NGramModel::train(&train, 5, vocab, SmoothingConfig::default())?;

    let mut context = vec![concept.method_names[0].clone()];
    context.extend(concept.calls[..2].iter().cloned());
    let mut candidates = g.call_pool().to_vec();
    candidates.extend(concept.method_names.iter().cloned());
    candidates.sort();
    candidates.dedup();
    let site = CallSiteRecord {
        site_id: "example".into(),
        project_id: "demo".into(),
        file_id: "demo/src/Example.java".into(),
        context,
        gold: concept.calls[2].clone(),
        candidates,
    };
    println!("context {:?}, expecting {}", site.context, site.gold);

    let cfg = RankerConfig::default();
    let suggesters = vec![
        Suggester::Alphabetical,
        Suggester::Pv(&pv),
        Suggester::NGram(&ngram),
        Suggester::NGramCache {
            model: &ngram,
            cache: CacheState::for_model(&ngram),
            scope: CacheScope::File,
        },
    ];
    for mut s in suggesters {
        let c = complete(&site, &mut s, &cfg);
        let rank = c.list.rank_of(&site.gold).map_or("-".to_string(), |r| r.to_string());
        println!("\n{} (gold rank {rank}, {:.2?})", s.label(), c.latency);
        for (i, item) in c.list.items.iter().take(5).enumerate() {
            println!("  {:>2}. {:<24} {:.4}", i + 1, item.token, item.score);
        }
    }
    Ok(())
}
