use callrank::corpus::FunctionSequence;
use callrank::embedding::{HyperParams, PvModel};
use callrank::ranker::{temporary_list_pv, RankerConfig};
use callrank::synth::{Layout, PlantedCorpus, SynthConfig};

fn seq(project: &str, tokens: &[&str]) -> FunctionSequence {
    FunctionSequence::new(
        format!("{project}/src/A.java"),
        tokens[0],
        tokens[1..].iter().map(|t| t.to_string()).collect(),
    )
}

fn strings(t: &[&str]) -> Vec<String> {
    t.iter().map(|s| s.to_string()).collect()
}

fn small_hyper() -> HyperParams {
    HyperParams {
        dim: 32,
        min_count: 1,
        epochs: 20,
        ..HyperParams::default()
    }
}

#[test]
fn dominant_neighbor_is_walked_first() {
    let groups: [&[&str]; 5] = [
        &["b", "f", "g"],
        &["h", "i", "j", "k"],
        &["m", "n", "o"],
        &["p", "q", "r", "s"],
        &["t", "u", "v"],
    ];
    let mut corpus = Vec::new();
    for i in 0..30 {
        for g in groups {
            corpus.push(seq(&format!("p{i}"), g));
        }
    }
    let model = PvModel::train(&corpus, &small_hyper()).unwrap();
    let (list, all_oov) = temporary_list_pv(&model, &strings(&["b", "f", "g"]), &RankerConfig::default());
    assert!(!all_oov);
    assert!(list.len() >= 2, "{:?}", list.tokens());
    assert_eq!(list.tokens()[..2], strings(&["f", "g"]));
}

#[test]
fn near_one_threshold_gives_near_empty_lists() {
    let mut g = PlantedCorpus::new(&SynthConfig::default()).unwrap();
    let train = g.corpus(
        Layout {
            projects: 4,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "train",
    );
    let model = PvModel::train(&train, &small_hyper()).unwrap();
    let pool = g.call_pool().to_vec();
    let cfg = RankerConfig {
        sim_threshold: 0.999,
        ..RankerConfig::default()
    };
    let mut rng_state = 7u64;
    let mut empty = 0;
    let trials = 100;
    for _ in 0..trials {
        let context: Vec<String> = (0..4)
            .map(|_| {
                rng_state = rng_state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                pool[(rng_state >> 33) as usize % pool.len()].clone()
            })
            .collect();
        let (list, _) = temporary_list_pv(&model, &context, &cfg);
        empty += list.is_empty() as usize;
    }
    assert!(empty >= 90, "only {empty} of {trials} lists were empty");
}

#[test]
fn planted_concept_completes_within_top_three() {
    let mut corpus = Vec::new();
    for i in 0..100 {
        corpus.push(seq(&format!("p{i}"), &["load", "open", "read", "close"]));
        corpus.push(seq(
            &format!("p{i}"),
            &["send", "connect", "write", "flush", "disconnect"],
        ));
        corpus.push(seq(&format!("p{i}"), &["parse", "tokenize", "lex", "emit"]));
    }
    let model = PvModel::train(&corpus, &small_hyper()).unwrap();
    let (list, _) = temporary_list_pv(&model, &strings(&["load", "open", "read"]), &RankerConfig::default());
    let rank = list.rank_of("close").expect("close suggested");
    assert!(rank <= 3, "close at rank {rank} in {:?}", list.tokens());
}

#[test]
fn larger_budget_only_appends() {
    let mut g = PlantedCorpus::new(&SynthConfig::default()).unwrap();
    let train = g.corpus(
        Layout {
            projects: 4,
            files_per_project: 10,
            methods_per_file: 10,
        },
        "train",
    );
    let model = PvModel::train(&train, &small_hyper()).unwrap();
    for s in train.iter().take(20) {
        let ctx: Vec<String> = s.tokens().take(3).map(str::to_string).collect();
        let mut prev: Vec<String> = Vec::new();
        for budget in [5, 20, 100] {
            let cfg = RankerConfig {
                neighbor_budget: budget,
                ..RankerConfig::default()
            };
            let (list, _) = temporary_list_pv(&model, &ctx, &cfg);
            let now = list.tokens();
            assert_eq!(now[..prev.len()], prev[..], "budget {budget}");
            prev = now;
        }
    }
}
