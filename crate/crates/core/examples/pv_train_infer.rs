//! Train PV-DBOW vectors, re-infer a few training documents and list their neighbors.

use std::time::Instant;

use callrank::embedding::{cosine, HyperParams, PvModel};
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
    let hyper = HyperParams {
        dim: 64,
        min_count: 5,
        epochs: 10,
        ..HyperParams::default()
    };

    let t = Instant::now();
    let model = PvModel::train(&train, &hyper)?;
    println!("trained {} documents in {:.2?}", model.num_docs(), t.elapsed());

    for d in [0, 1, 2] {
        let doc = model.doc(d);
        let inferred = model.infer_ids(&doc.ids, hyper.infer_steps);
        let tokens: Vec<&str> = doc.ids.iter().map(|&i| model.vocab().token(i)).collect();
        println!("\n{} [{}]", doc.source_id, tokens.join(" "));
        println!(
            "  trained vs re-inferred cosine {:.3}",
            cosine(&inferred.vector, model.doc_vector(d))
        );
        for hit in model.most_similar(&inferred.vector, 3)? {
            let n: Vec<&str> = model
                .doc(hit.doc_id)
                .ids
                .iter()
                .map(|&i| model.vocab().token(i))
                .collect();
            println!("  {:.3}  {}", hit.score, n.join(" "));
        }
    }
    Ok(())
}
