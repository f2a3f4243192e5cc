//! Call-site benchmark records and the built-in candidate generator.
//!
//! A record pairs the context of a call with the list a static analysis
//! would offer at that point. The built-in [`NaiveCandidates`] is a weak
//! surrogate: every token seen in the project, with no type filtering.
//! Real type-based lists can be imported as JSON Lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{project_of, FunctionSequence, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSiteRecord {
    pub site_id: String,
    pub project_id: String,
    pub file_id: String,
    /// Method name followed by the calls preceding the site.
    pub context: Vec<String>,
    pub gold: String,
    /// Sorted, no duplicates.
    pub candidates: Vec<String>,
}

impl CallSiteRecord {
    /// 1-based index of the call within its method.
    pub fn position(&self) -> usize {
        self.context.len()
    }

    pub fn gold_in_candidates(&self) -> bool {
        self.candidates.binary_search(&self.gold).is_ok()
    }

    /// Structural checks that hold for every stored record.
    pub fn validate(&self) -> Result<()> {
        if self.context.is_empty() {
            return Err(Error::Invariant(format!("{}: empty context", self.site_id)));
        }
        if self.candidates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invariant(format!(
                "{}: candidates are not sorted and unique",
                self.site_id
            )));
        }
        Ok(())
    }
}

/// Supplies the static candidate list for a call site.
pub trait CandidateSource {
    fn candidates(&self, project_id: &str, file_id: &str) -> Vec<String>;

    fn label(&self) -> &str;
}

/// Every distinct method name and call observed in a project, sorted.
#[derive(Debug, Clone, Default)]
pub struct NaiveCandidates {
    per_project: BTreeMap<String, Vec<String>>,
}

impl NaiveCandidates {
    pub fn from_sequences(sequences: &[FunctionSequence]) -> Self {
        let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for s in sequences {
            let set = sets.entry(s.project_id().to_string()).or_default();
            set.extend(s.tokens().map(str::to_string));
        }
        Self {
            per_project: sets.into_iter().map(|(p, s)| (p, s.into_iter().collect())).collect(),
        }
    }
}

impl CandidateSource for NaiveCandidates {
    fn candidates(&self, project_id: &str, _file_id: &str) -> Vec<String> {
        self.per_project.get(project_id).cloned().unwrap_or_default()
    }

    fn label(&self) -> &str {
        "naive (project token union, no type filtering)"
    }
}

/// The naive candidate list for the project that `file_id` belongs to.
pub fn naive_candidates(project_sequences: &[FunctionSequence], file_id: &str) -> Vec<String> {
    let project = project_of(file_id);
    let set: BTreeSet<&str> = project_sequences
        .iter()
        .filter(|s| s.project_id() == project)
        .flat_map(|s| s.tokens())
        .collect();
    set.into_iter().map(str::to_string).collect()
}

/// Call sites with gold-missing records already removed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchmarkSet {
    pub records: Vec<CallSiteRecord>,
    /// Records dropped because the gold call was not among the candidates.
    pub excluded: usize,
    pub excluded_per_project: BTreeMap<String, usize>,
    pub source_label: String,
}

impl BenchmarkSet {
    pub fn from_records(records: Vec<CallSiteRecord>, source_label: impl Into<String>) -> Self {
        let mut excluded_per_project: BTreeMap<String, usize> = BTreeMap::new();
        let records: Vec<CallSiteRecord> = records
            .into_iter()
            .filter(|r| {
                let keep = r.gold_in_candidates();
                if !keep {
                    *excluded_per_project.entry(r.project_id.clone()).or_default() += 1;
                }
                keep
            })
            .collect();
        Self {
            excluded: excluded_per_project.values().sum(),
            excluded_per_project,
            records,
            source_label: source_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records grouped by project, input order preserved within each group.
    pub fn by_project(&self) -> BTreeMap<&str, Vec<&CallSiteRecord>> {
        let mut out: BTreeMap<&str, Vec<&CallSiteRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.project_id.as_str()).or_default().push(r);
        }
        out
    }

    /// Fraction of gold tokens that are in `vocab`; 0 for an empty set.
    pub fn coverage(&self, vocab: &Vocabulary) -> f64 {
        coverage(&self.records, vocab)
    }
}

/// Fraction of `records` whose gold token is in `vocab`; 0 when empty.
pub fn coverage<'a>(records: impl IntoIterator<Item = &'a CallSiteRecord>, vocab: &Vocabulary) -> f64 {
    let (mut hit, mut n) = (0usize, 0usize);
    for r in records {
        n += 1;
        hit += vocab.known_id(&r.gold).is_some_and(|id| id != Vocabulary::UNK_ID) as usize;
    }
    if n == 0 {
        0.0
    } else {
        hit as f64 / n as f64
    }
}

/// Fail with the overlapping project ids if any test project trained.
pub fn check_disjoint<'a>(
    train_projects: impl IntoIterator<Item = &'a str>,
    test_projects: impl IntoIterator<Item = &'a str>,
) -> Result<()> {
    let train: BTreeSet<&str> = train_projects.into_iter().collect();
    let overlap: BTreeSet<&str> = test_projects.into_iter().filter(|p| train.contains(p)).collect();
    if overlap.is_empty() {
        Ok(())
    } else {
        Err(Error::ProjectOverlap(overlap.into_iter().map(str::to_string).collect()))
    }
}

/// One record per call of every held-out method; a method with `c` calls
/// yields `c` records.
pub fn synthesize_call_sites(sequences: &[FunctionSequence], source: &dyn CandidateSource) -> BenchmarkSet {
    let mut records = Vec::new();
    let mut cache: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    for (i, seq) in sequences.iter().enumerate() {
        let project = seq.project_id().to_string();
        for (pos, gold) in seq.calls.iter().enumerate() {
            let candidates = cache
                .entry((project.clone(), seq.source_id.clone()))
                .or_insert_with(|| {
                    let mut c = source.candidates(&project, &seq.source_id);
                    c.sort();
                    c.dedup();
                    c
                })
                .clone();
            let mut context = Vec::with_capacity(pos + 1);
            context.push(seq.method_name.clone());
            context.extend(seq.calls[..pos].iter().cloned());
            records.push(CallSiteRecord {
                site_id: format!("{}#{}:{}", seq.source_id, i, pos + 1),
                project_id: project.clone(),
                file_id: seq.source_id.clone(),
                context,
                gold: gold.clone(),
                candidates,
            });
        }
    }
    BenchmarkSet::from_records(records, source.label())
}

pub fn write_callsites_to<W: Write>(mut w: W, records: &[CallSiteRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_callsites(path: &Path, records: &[CallSiteRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_callsites_to(&mut w, records)?;
    w.flush()?;
    Ok(())
}

/// Read records, one JSON object per line. Blank lines are skipped; each
/// record must pass [`CallSiteRecord::validate`].
pub fn read_callsites_from<R: BufRead>(r: R) -> Result<Vec<CallSiteRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CallSiteRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            kind: "call-site record",
            line: i + 1,
            reason: e.to_string(),
        })?;
        rec.validate().map_err(|e| Error::Parse {
            kind: "call-site record",
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_callsites(path: &Path) -> Result<Vec<CallSiteRecord>> {
    read_callsites_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(src: &str, name: &str, calls: &[&str]) -> FunctionSequence {
        FunctionSequence::new(src, name, calls.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn size_example() {
        let seqs = vec![seq("p/File.java", "size", &["isFile", "toString", "length"])];
        let set = synthesize_call_sites(&seqs, &NaiveCandidates::from_sequences(&seqs));
        assert_eq!(set.len(), 3);
        assert_eq!(set.excluded, 0);
        let r = &set.records[2];
        assert_eq!(r.context, vec!["size", "isFile", "toString"]);
        assert_eq!(r.gold, "length");
        assert_eq!(r.position(), 3);
        assert_eq!(set.records[0].context, vec!["size"]);
        assert_eq!(r.candidates, vec!["isFile", "length", "size", "toString"]);
    }

    #[test]
    fn zero_calls_zero_records() {
        let seqs = vec![seq("p/A.java", "empty", &[])];
        assert!(synthesize_call_sites(&seqs, &NaiveCandidates::from_sequences(&seqs)).is_empty());
    }

    #[test]
    fn one_record_per_call() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seqs: Vec<FunctionSequence> = (0..100)
            .map(|i| {
                let calls: Vec<String> = (0..5).map(|_| format!("c{}", rng.random_range(0..30))).collect();
                FunctionSequence::new(format!("p{}/F.java", i % 4), format!("m{i}"), calls)
            })
            .collect();
        let set = synthesize_call_sites(&seqs, &NaiveCandidates::from_sequences(&seqs));
        assert_eq!(set.len(), 500);
        for r in &set.records {
            assert!(r.gold_in_candidates());
            r.validate().unwrap();
        }
    }

    struct Fixed(Vec<String>);

    impl CandidateSource for Fixed {
        fn candidates(&self, _: &str, _: &str) -> Vec<String> {
            self.0.clone()
        }

        fn label(&self) -> &str {
            "fixed"
        }
    }

    #[test]
    fn gold_missing_records_are_counted() {
        let seqs = vec![seq("p/A.java", "m", &["a", "b", "zz"])];
        let set = synthesize_call_sites(&seqs, &Fixed(vec!["b".into(), "a".into(), "a".into()]));
        assert_eq!(set.len(), 2);
        assert_eq!(set.excluded, 1);
        assert_eq!(set.excluded_per_project.get("p"), Some(&1));
        assert_eq!(set.records[0].candidates, vec!["a", "b"]);
        assert_eq!(set.source_label, "fixed");
    }

    #[test]
    fn naive_candidates_are_per_project() {
        let seqs = vec![
            seq("p/A.java", "m", &["b", "a"]),
            seq("p/B.java", "n", &["c"]),
            seq("q/C.java", "o", &["d"]),
        ];
        assert_eq!(naive_candidates(&seqs, "p/A.java"), vec!["a", "b", "c", "m", "n"]);
        assert_eq!(naive_candidates(&seqs, "q/X.java"), vec!["d", "o"]);
        assert!(naive_candidates(&seqs, "r/X.java").is_empty());
    }

    #[test]
    fn disjointness() {
        assert!(check_disjoint(["a", "b"], ["c"]).is_ok());
        match check_disjoint(["a", "b"], ["b", "c", "a"]) {
            Err(Error::ProjectOverlap(p)) => assert_eq!(p, vec!["a", "b"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coverage_counts_known_golds() {
        let seqs = vec![seq("p/A.java", "m", &["a", "a", "b"])];
        let vocab = Vocabulary::build(&seqs, 2, crate::corpus::TokenMode::FullNames).unwrap();
        let set = synthesize_call_sites(&seqs, &NaiveCandidates::from_sequences(&seqs));
        assert!((set.coverage(&vocab) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(BenchmarkSet::default().coverage(&vocab), 0.0);
    }

    #[test]
    fn unsorted_candidates_are_rejected_on_read() {
        let line =
            r#"{"site_id":"s","project_id":"p","file_id":"p/A","context":["m"],"gold":"a","candidates":["b","a"]}"#;
        match read_callsites_from(line.as_bytes()) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(read_callsites_from("not json\n".as_bytes()).is_err());
    }

    fn token() -> impl Strategy<Value = String> {
        "[a-zA-Z_$][a-zA-Z0-9_$\"\\\\ é]{0,8}"
    }

    proptest! {
        #[test]
        fn file_round_trip(records in prop::collection::vec(
            (token(), token(), prop::collection::vec(token(), 1..5), token(), prop::collection::btree_set(token(), 0..6)),
            0..8,
        )) {
            let records: Vec<CallSiteRecord> = records
                .into_iter()
                .enumerate()
                .map(|(i, (p, f, context, gold, cands))| CallSiteRecord {
                    site_id: format!("s{i}"),
                    project_id: p,
                    file_id: f,
                    context,
                    gold,
                    candidates: cands.into_iter().collect(),
                })
                .collect();
            let mut buf = Vec::new();
            write_callsites_to(&mut buf, &records).unwrap();
            let back = read_callsites_from(buf.as_slice()).unwrap();
            prop_assert_eq!(back, records);
        }
    }
}
