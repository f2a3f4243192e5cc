//! Train n-gram models with each smoothing method and compare held-out cross-entropy.

use callrank::corpus::{TokenMode, Vocabulary};
use callrank::ngram::{NGramModel, SmoothingConfig};
use callrank::synth::{Layout, PlantedCorpus, SynthConfig};

fn main() -> callrank::Result<()> {
    let mut g = PlantedCorpus::new(&SynthConfig::default())?;
    let train = g.corpus(
        Layout {
            projects: 8,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "train",
    );
    let test = g.corpus(
        Layout {
            projects: 1,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "test",
    );
    let vocab = Vocabulary::build(&train, 5, TokenMode::FullNames)?;
    let held_out: Vec<Vec<u32>> = test.iter().map(|s| vocab.encode_sequence(s)).collect();

    println!("{:<16} {:>6} {:>8}", "smoothing", "order", "bits");
    for smoothing in [
        SmoothingConfig::mle(),
        SmoothingConfig::jelinek_mercer(0.5),
        SmoothingConfig::kneser_ney(0.75),
    ] {
        for order in [2, 3, 5] {
            let model = NGramModel::train(&train, order, vocab.clone(), smoothing)?;
            println!(
                "{:<16} {:>6} {:>8.3}",
                smoothing.kind.as_str(),
                order,
                model.cross_entropy(&held_out, false)?
            );
        }
    }

    let model = NGramModel::train(&train, 5, vocab.clone(), SmoothingConfig::default())?;
    let seq = &test[0];
    let ctx: Vec<&str> = seq.tokens().take(2).collect();
    println!("\nafter {ctx:?}:");
    let ids = vocab.encode(ctx.iter().copied());
    for (id, p) in model.predict_top_k(None, &ids, 5) {
        println!("  {:<20} {p:.4}", vocab.token(id));
    }
    Ok(())
}
