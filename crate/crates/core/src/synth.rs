//! Planted-pattern corpora for experiments and fixtures.
//!
//! A fixed set of concepts, each an ordered list of camelCase calls plus a
//! few method names, is instantiated many times with token noise. Calls of
//! a concept share a theme noun, and every concept mixes in calls from a
//! common pool, so a short context is ambiguous where a longer one is not.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::FunctionSequence;
use crate::error::{Error, Result};

const VERBS: &[&str] = &[
    "open", "close", "read", "write", "load", "save", "parse", "format", "create", "update", "find", "check", "build",
    "send", "receive", "start", "stop", "init", "reset", "compute", "validate", "convert", "flush", "register",
    "resolve", "merge", "split", "encode", "decode", "apply",
];

const NOUNS: &[&str] = &[
    "File", "Stream", "Buffer", "Line", "Request", "Response", "Header", "Token", "Node", "Tree", "Record", "Entry",
    "User", "Session", "Config", "Channel", "Socket", "Packet", "Frame", "Image", "Pixel", "Matrix", "Vector", "Graph",
    "Edge", "Query", "Table", "Column", "Row", "Cursor", "Schema", "Index", "Cache", "Queue", "Task", "Thread",
    "Timer", "Event", "Listener", "Handler", "Message", "Topic", "Account", "Order", "Invoice", "Payment", "Report",
    "Chart", "Widget", "Layout", "Font", "Color", "Shape", "Path", "Route", "Module", "Plugin",
];

const COMMON: &[&str] = &[
    "checkState",
    "getLogger",
    "isEmpty",
    "size",
    "toString",
    "hashCode",
    "equals",
    "getValue",
    "setValue",
    "getName",
    "getId",
    "add",
    "remove",
    "contains",
    "clear",
    "iterator",
    "hasNext",
    "next",
    "append",
    "put",
    "get",
    "trim",
    "length",
    "valueOf",
    "requireNonNull",
    "debug",
    "info",
    "warn",
    "close",
    "flush",
];

const METHOD_VERBS: &[&str] = &[
    "process", "handle", "run", "execute", "perform", "do", "make", "prepare",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub method_names: Vec<String>,
    pub calls: Vec<String>,
}

/// Concept instantiation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub concepts: usize,
    /// Per-token corruption probability, split evenly into drop, substitute
    /// and swap-with-next.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            concepts: 50,
            noise: 0.2,
            seed: 42,
        }
    }
}

/// Projects × files × methods layout of a generated corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub projects: usize,
    pub files_per_project: usize,
    pub methods_per_file: usize,
}

impl Layout {
    pub fn sequences(&self) -> usize {
        self.projects * self.files_per_project * self.methods_per_file
    }
}

/// Deterministic generator of concept instances.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    concepts: Vec<Concept>,
    pool: Vec<String>,
    noise: f64,
    rng: ChaCha8Rng,
}

fn theme_noun(i: usize) -> String {
    let n = NOUNS.len();
    if i < n {
        NOUNS[i].to_string()
    } else {
        format!("{}{}", NOUNS[i % n], NOUNS[(i / n + i) % n])
    }
}

impl PlantedCorpus {
    pub fn new(cfg: &SynthConfig) -> Result<Self> {
        if cfg.concepts == 0 {
            return Err(Error::Config("at least one concept is required".into()));
        }
        if !(0.0..1.0).contains(&cfg.noise) {
            return Err(Error::Config(format!("noise must lie in [0, 1), got {}", cfg.noise)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut concepts = Vec::with_capacity(cfg.concepts);
        for i in 0..cfg.concepts {
            let noun = theme_noun(i);
            let len: usize = rng.random_range(4..=8);
            let themed = (len * 3).div_ceil(5);
            let mut verbs: Vec<&str> = VERBS.to_vec();
            verbs.shuffle(&mut rng);
            let mut calls: Vec<String> = verbs[..themed].iter().map(|v| format!("{v}{noun}")).collect();
            let mut common: Vec<&str> = COMMON.to_vec();
            common.shuffle(&mut rng);
            calls.extend(common[..len - themed].iter().map(|c| c.to_string()));
            calls[1..].shuffle(&mut rng);
            let mut mverbs: Vec<&str> = METHOD_VERBS.to_vec();
            mverbs.shuffle(&mut rng);
            let method_names = mverbs[..3].iter().map(|v| format!("{v}{noun}")).collect();
            concepts.push(Concept { method_names, calls });
        }
        let mut pool: Vec<String> = concepts.iter().flat_map(|c| c.calls.iter().cloned()).collect();
        pool.sort();
        pool.dedup();
        Ok(Self {
            concepts,
            pool,
            noise: cfg.noise,
            rng,
        })
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    /// Every distinct call used by some concept.
    pub fn call_pool(&self) -> &[String] {
        &self.pool
    }

    /// A noisy instance of concept `c`: method name and calls.
    pub fn instance(&mut self, c: usize) -> (String, Vec<String>) {
        let concept = &self.concepts[c];
        let name = concept.method_names.choose(&mut self.rng).expect("three names").clone();
        let mut calls = concept.calls.clone();
        let third = self.noise / 3.0;
        let mut out: Vec<String> = Vec::with_capacity(calls.len());
        let mut i = 0;
        while i < calls.len() {
            let u: f64 = self.rng.random();
            if u < third {
                // dropped
            } else if u < 2.0 * third {
                out.push(self.pool.choose(&mut self.rng).expect("non-empty pool").clone());
            } else if u < self.noise && i + 1 < calls.len() {
                calls.swap(i, i + 1);
                out.push(calls[i].clone());
            } else {
                out.push(calls[i].clone());
            }
            i += 1;
        }
        if out.is_empty() {
            out.push(concept.calls[0].clone());
        }
        (name, out)
    }

    /// Sequences laid out as `{prefix}{p}/src/F{f}.java`, concepts drawn
    /// uniformly per method.
    pub fn corpus(&mut self, layout: Layout, prefix: &str) -> Vec<FunctionSequence> {
        let mut out = Vec::with_capacity(layout.sequences());
        for p in 0..layout.projects {
            for f in 0..layout.files_per_project {
                let source = format!("{prefix}{p}/src/F{f}.java");
                for _ in 0..layout.methods_per_file {
                    let c = self.rng.random_range(0..self.concepts.len());
                    let (name, calls) = self.instance(c);
                    out.push(FunctionSequence::new(source.clone(), name, calls));
                }
            }
        }
        out
    }

    /// Like [`PlantedCorpus::corpus`], but each file also has a private
    /// idiom of calls found nowhere else, and roughly half of its methods
    /// are verbatim copies of that idiom.
    pub fn corpus_with_local_idioms(&mut self, layout: Layout, prefix: &str) -> Vec<FunctionSequence> {
        let mut out = Vec::with_capacity(layout.sequences());
        for p in 0..layout.projects {
            for f in 0..layout.files_per_project {
                let source = format!("{prefix}{p}/src/F{f}.java");
                let len = self.rng.random_range(4..=7);
                let idiom: Vec<String> = (0..len)
                    .map(|k| {
                        let v = VERBS.choose(&mut self.rng).expect("verbs");
                        let n = NOUNS.choose(&mut self.rng).expect("nouns");
                        format!("{v}{n}Local{p}x{f}x{k}")
                    })
                    .collect();
                let idiom_name = format!("helperLocal{p}x{f}");
                for _ in 0..layout.methods_per_file {
                    if self.rng.random_bool(0.5) {
                        out.push(FunctionSequence::new(source.clone(), idiom_name.clone(), idiom.clone()));
                    } else {
                        let c = self.rng.random_range(0..self.concepts.len());
                        let (name, calls) = self.instance(c);
                        out.push(FunctionSequence::new(source.clone(), name, calls));
                    }
                }
            }
        }
        out
    }
}

/// Render sequences as Java sources under `root`, one class per source id.
/// Extracting the tree gives back the same sequences in the same order.
pub fn write_java_tree(root: &Path, sequences: &[FunctionSequence]) -> Result<usize> {
    let mut files: BTreeMap<&str, Vec<&FunctionSequence>> = BTreeMap::new();
    for s in sequences {
        files.entry(s.source_id.as_str()).or_default().push(s);
    }
    for (id, seqs) in &files {
        let path = root.join(id);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let class = Path::new(id)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("Generated");
        let mut src = String::new();
        let _ = writeln!(src, "package generated;\n\npublic class {class} {{");
        for s in seqs {
            let _ = writeln!(src, "    void {}() {{", s.method_name);
            for c in &s.calls {
                let _ = writeln!(src, "        target.{c}();");
            }
            let _ = writeln!(src, "    }}\n");
        }
        let _ = writeln!(src, "}}");
        fs::write(path, src)?;
    }
    Ok(files.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{extract_tree, TokenizerConfig};

    #[test]
    fn deterministic_given_seed() {
        let layout = Layout {
            projects: 2,
            files_per_project: 3,
            methods_per_file: 4,
        };
        let a = PlantedCorpus::new(&SynthConfig::default()).unwrap().corpus(layout, "p");
        let b = PlantedCorpus::new(&SynthConfig::default()).unwrap().corpus(layout, "p");
        assert_eq!(a, b);
        assert_eq!(a.len(), 24);
        let c = PlantedCorpus::new(&SynthConfig {
            seed: 7,
            ..SynthConfig::default()
        })
        .unwrap()
        .corpus(layout, "p");
        assert_ne!(a, c);
    }

    #[test]
    fn concepts_have_expected_shape() {
        let g = PlantedCorpus::new(&SynthConfig::default()).unwrap();
        assert_eq!(g.concepts().len(), 50);
        for c in g.concepts() {
            assert!((4..=8).contains(&c.calls.len()));
            assert_eq!(c.method_names.len(), 3);
        }
        let names: std::collections::BTreeSet<&String> = g.concepts().iter().flat_map(|c| &c.method_names).collect();
        assert_eq!(names.len(), 150);
    }

    #[test]
    fn noiseless_instances_are_exact() {
        let mut g = PlantedCorpus::new(&SynthConfig {
            noise: 0.0,
            ..SynthConfig::default()
        })
        .unwrap();
        for c in 0..10 {
            let (name, calls) = g.instance(c);
            assert!(g.concepts()[c].method_names.contains(&name));
            assert_eq!(calls, g.concepts()[c].calls);
        }
    }

    #[test]
    fn noise_rate_is_close_to_configured() {
        let mut g = PlantedCorpus::new(&SynthConfig::default()).unwrap();
        let (mut changed, mut total) = (0usize, 0usize);
        for i in 0..2000 {
            let c = i % 50;
            let clean = g.concepts()[c].calls.clone();
            let (_, calls) = g.instance(c);
            total += clean.len();
            changed += clean.iter().zip(&calls).filter(|(a, b)| a != b).count() + clean.len().abs_diff(calls.len());
        }
        let rate = changed as f64 / total as f64;
        assert!(rate > 0.1 && rate < 0.5, "{rate}");
    }

    #[test]
    fn rejects_bad_config() {
        assert!(PlantedCorpus::new(&SynthConfig {
            concepts: 0,
            ..SynthConfig::default()
        })
        .is_err());
        assert!(PlantedCorpus::new(&SynthConfig {
            noise: 1.0,
            ..SynthConfig::default()
        })
        .is_err());
    }

    #[test]
    fn java_tree_round_trips_through_extraction() {
        let dir = tempfile::tempdir().unwrap();
        let mut g = PlantedCorpus::new(&SynthConfig::default()).unwrap();
        let seqs = g.corpus(
            Layout {
                projects: 2,
                files_per_project: 3,
                methods_per_file: 5,
            },
            "proj",
        );
        assert_eq!(write_java_tree(dir.path(), &seqs).unwrap(), 6);
        let back = extract_tree(dir.path(), &TokenizerConfig::default()).unwrap();
        let strip = |s: &FunctionSequence| (s.source_id.clone(), s.method_name.clone(), s.calls.clone());
        assert_eq!(
            back.sequences.iter().map(strip).collect::<Vec<_>>(),
            seqs.iter().map(strip).collect::<Vec<_>>()
        );
    }

    #[test]
    fn local_idioms_repeat_within_a_file() {
        let mut g = PlantedCorpus::new(&SynthConfig::default()).unwrap();
        let seqs = g.corpus_with_local_idioms(
            Layout {
                projects: 1,
                files_per_project: 4,
                methods_per_file: 10,
            },
            "t",
        );
        let idioms = seqs.iter().filter(|s| s.method_name.starts_with("helperLocal")).count();
        assert!(idioms > 10 && idioms < 30, "{idioms}");
    }
}
