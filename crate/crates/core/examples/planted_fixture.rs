//! Write a planted-concept Java corpus for the command-line pipeline.
//!
//! `cargo run --example planted_fixture -- <dir> [train_projects] [test_projects]`
//! creates `<dir>/train/` and `<dir>/test/`, one subdirectory per project.

use std::path::PathBuf;

use callrank::synth::{write_java_tree, Layout, PlantedCorpus, SynthConfig};

fn main() -> callrank::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(args.next().unwrap_or_else(|| "fixture".into()));
    let train_projects = args.next().and_then(|a| a.parse().ok()).unwrap_or(16);
    let test_projects = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);

    let mut g = PlantedCorpus::new(&SynthConfig::default())?;
    let train = g.corpus(
        Layout {
            projects: train_projects,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "train",
    );
    let test = g.corpus(
        Layout {
            projects: test_projects,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "test",
    );
    let a = write_java_tree(&root.join("train"), &train)?;
    let b = write_java_tree(&root.join("test"), &test)?;
    println!("wrote {a} training and {b} held-out files under {}", root.display());
    Ok(())
}
