//! Cross-entropy against n-gram order for full names and subtokens, as CSV.

use callrank::eval::{entropy_csv, entropy_rows, EntropyConfig, OovMode};
use callrank::synth::{Layout, PlantedCorpus, SynthConfig};

fn main() -> callrank::Result<()> {
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
            projects: 2,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "test",
    );
    let cfg = EntropyConfig {
        oov_modes: vec![OovMode::Include, OovMode::Exclude],
        ..EntropyConfig::default()
    };
    print!("{}", entropy_csv(&entropy_rows(&train, &test, &cfg)?));
    Ok(())
}
