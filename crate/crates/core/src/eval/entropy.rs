use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::corpus::{default_min_count, FunctionSequence, TokenMode, Vocabulary};
use crate::error::{Error, Result};
use crate::ngram::{NGramModel, SmoothingConfig, MAX_ORDER, MIN_ORDER};

/// Whether `<unk>` targets count towards the average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OovMode {
    Include,
    Exclude,
}

impl OovMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OovMode::Include => "include",
            OovMode::Exclude => "exclude",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "include" => Some(Self::Include),
            "exclude" => Some(Self::Exclude),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EntropyConfig {
    pub orders: RangeInclusive<usize>,
    pub modes: Vec<TokenMode>,
    pub oov_modes: Vec<OovMode>,
    pub smoothing: SmoothingConfig,
    /// Per-mode minimum count; `None` uses the mode default.
    pub min_count_full: Option<u64>,
    pub min_count_subtokens: Option<u64>,
    pub lowercase_subtokens: bool,
    pub split_method_names: bool,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            orders: MIN_ORDER..=MAX_ORDER,
            modes: vec![TokenMode::FullNames, TokenMode::Subtokens],
            oov_modes: vec![OovMode::Include, OovMode::Exclude],
            smoothing: SmoothingConfig::default(),
            min_count_full: None,
            min_count_subtokens: None,
            lowercase_subtokens: true,
            split_method_names: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRow {
    pub project: String,
    pub order: usize,
    pub token_mode: TokenMode,
    pub oov_mode: OovMode,
    pub bits: f64,
}

fn in_mode(seqs: &[FunctionSequence], mode: TokenMode, cfg: &EntropyConfig) -> Vec<FunctionSequence> {
    match mode {
        TokenMode::FullNames => seqs.to_vec(),
        TokenMode::Subtokens => seqs
            .iter()
            .map(|s| s.to_subtokens(cfg.lowercase_subtokens, cfg.split_method_names))
            .collect(),
    }
}

/// Cross-entropy of every held-out project under models trained on `train`,
/// for each order, token mode and OOV mode. Input sequences are full names.
pub fn entropy_rows(
    train: &[FunctionSequence],
    test: &[FunctionSequence],
    cfg: &EntropyConfig,
) -> Result<Vec<EntropyRow>> {
    if train.is_empty() {
        return Err(Error::Empty("training sequences"));
    }
    if test.is_empty() {
        return Err(Error::Empty("test sequences"));
    }
    let mut rows = Vec::new();
    for &mode in &cfg.modes {
        let tr = in_mode(train, mode, cfg);
        let te = in_mode(test, mode, cfg);
        let min_count = match mode {
            TokenMode::FullNames => cfg.min_count_full,
            TokenMode::Subtokens => cfg.min_count_subtokens,
        }
        .unwrap_or_else(|| default_min_count(mode));
        let vocab = Vocabulary::build(&tr, min_count, mode)?;
        let mut by_project: BTreeMap<&str, Vec<Vec<u32>>> = BTreeMap::new();
        for s in &te {
            by_project
                .entry(s.project_id())
                .or_default()
                .push(vocab.encode_sequence(s));
        }
        for order in cfg.orders.clone() {
            let model = NGramModel::train(&tr, order, vocab.clone(), cfg.smoothing)?;
            for (project, seqs) in &by_project {
                for &oov in &cfg.oov_modes {
                    let bits = model.cross_entropy(seqs, oov == OovMode::Exclude)?;
                    rows.push(EntropyRow {
                        project: project.to_string(),
                        order,
                        token_mode: mode,
                        oov_mode: oov,
                        bits,
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a.project, a.token_mode.as_str(), a.oov_mode.as_str(), a.order).cmp(&(
            &b.project,
            b.token_mode.as_str(),
            b.oov_mode.as_str(),
            b.order,
        ))
    });
    Ok(rows)
}

/// Rows as CSV: `project,order,token_mode,oov_mode,entropy_bits`.
pub fn entropy_csv(rows: &[EntropyRow]) -> String {
    let mut s = String::from("project,order,token_mode,oov_mode,entropy_bits\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6}",
            r.project,
            r.order,
            r.token_mode.as_str(),
            r.oov_mode.as_str(),
            r.bits
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(src: &str, calls: &[&str]) -> FunctionSequence {
        FunctionSequence::new(src, "runTask", calls.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn nine_rows_per_project_and_mode() {
        let train: Vec<FunctionSequence> = (0..30)
            .map(|i| seq(&format!("t/F{i}.java"), &["openFile", "readLine", "closeFile"]))
            .collect();
        let test = vec![
            seq("a/X.java", &["openFile", "readLine"]),
            seq("b/Y.java", &["closeFile", "writeLine"]),
        ];
        let cfg = EntropyConfig {
            min_count_full: Some(1),
            min_count_subtokens: Some(1),
            ..EntropyConfig::default()
        };
        let rows = entropy_rows(&train, &test, &cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2 * 9);
        let a_full_inc: Vec<&EntropyRow> = rows
            .iter()
            .filter(|r| r.project == "a" && r.token_mode == TokenMode::FullNames && r.oov_mode == OovMode::Include)
            .collect();
        assert_eq!(
            a_full_inc.iter().map(|r| r.order).collect::<Vec<_>>(),
            (2..=10).collect::<Vec<_>>()
        );
        let csv = entropy_csv(&rows);
        assert_eq!(csv.lines().count(), rows.len() + 1);
        assert!(csv.starts_with("project,order,token_mode,oov_mode,entropy_bits\na,2,full_names,exclude,"));
    }

    #[test]
    fn empty_inputs_error() {
        let s = vec![seq("a/X.java", &["f"])];
        assert!(entropy_rows(&[], &s, &EntropyConfig::default()).is_err());
        assert!(entropy_rows(&s, &[], &EntropyConfig::default()).is_err());
    }
}
