//! Line-oriented sequence files.
//!
//! ```text
//! #mode full_names
//! #source project/src/FileSize.java
//! size isFile toString length
//! ```
//!
//! One sequence per line, whitespace-separated, method name first. A
//! `#source` directive applies to every following line until the next one.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::extract::{FunctionSequence, TokenMode};
use crate::error::{Error, Result};

fn check_token(tok: &str) -> Result<()> {
    if tok.is_empty() || tok.chars().any(char::is_whitespace) {
        return Err(Error::WhitespaceToken(tok.to_string()));
    }
    Ok(())
}

pub fn write_sequences_to<W: Write>(mut w: W, sequences: &[FunctionSequence]) -> Result<()> {
    let mode = sequences.first().map(|s| s.mode).unwrap_or_default();
    writeln!(w, "#mode {}", mode.as_str())?;
    let mut current: Option<&str> = None;
    for seq in sequences {
        if seq.mode != mode {
            return Err(Error::MixedTokenModes {
                expected: mode.as_str(),
                found: seq.mode.as_str(),
                source_id: seq.source_id.clone(),
            });
        }
        if current != Some(seq.source_id.as_str()) {
            check_token(&seq.source_id)?;
            writeln!(w, "#source {}", seq.source_id)?;
            current = Some(&seq.source_id);
        }
        if seq.method_name.starts_with('#') {
            return Err(Error::Config(format!(
                "method name {:?} would be read back as a directive",
                seq.method_name
            )));
        }
        let mut line = String::new();
        for (i, tok) in seq.tokens().enumerate() {
            check_token(tok)?;
            if i > 0 {
                line.push(' ');
            }
            line.push_str(tok);
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sequences(path: &Path, sequences: &[FunctionSequence]) -> Result<()> {
    // validate before truncating an existing file
    let mut buf = Vec::new();
    write_sequences_to(&mut buf, sequences)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_sequences_from<R: BufRead>(r: R) -> Result<Vec<FunctionSequence>> {
    let mut mode = TokenMode::FullNames;
    let mut source = String::new();
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if let Some(directive) = line.strip_prefix('#') {
            let mut parts = directive.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("mode"), Some(m)) => {
                    mode = TokenMode::parse(m).ok_or_else(|| Error::Parse {
                        kind: "sequence file",
                        line: lineno,
                        reason: format!("unknown mode {m:?}"),
                    })?;
                }
                (Some("source"), Some(s)) => source = s.to_string(),
                _ => {} // comment
            }
            continue;
        }
        let mut toks = line.split_whitespace().map(str::to_string);
        let Some(name) = toks.next() else { continue };
        out.push(FunctionSequence {
            source_id: source.clone(),
            method_name: name,
            calls: toks.collect(),
            byte_span: (0, 0),
            mode,
        });
    }
    Ok(out)
}

pub fn read_sequences(path: &Path) -> Result<Vec<FunctionSequence>> {
    read_sequences_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn whitespace_tokens_rejected() {
        let s = FunctionSequence::new("p/F.java", "m", vec!["bad token".into()]);
        let mut buf = Vec::new();
        assert!(matches!(
            write_sequences_to(&mut buf, &[s]),
            Err(Error::WhitespaceToken(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seqs.txt");
        let seqs = vec![
            FunctionSequence::new(
                "p/A.java",
                "size",
                vec!["isFile".into(), "toString".into(), "length".into()],
            ),
            FunctionSequence::new("p/A.java", "empty", vec![]),
            FunctionSequence::new("q/B.java", "run", vec!["go".into()]),
        ];
        write_sequences(&path, &seqs).unwrap();
        assert_eq!(read_sequences(&path).unwrap(), seqs);
    }

    proptest! {
        #[test]
        fn round_trip_identity(
            rows in prop::collection::vec(
                ("[a-z]{1,3}/[A-Z][a-z]{0,4}", "[a-zA-Z_$][a-zA-Z0-9_$<>.]{0,8}", prop::collection::vec("[a-zA-Z_$#][a-zA-Z0-9_]{0,8}", 0..6)),
                0..20),
            subtokens in any::<bool>(),
        ) {
            let mode = if subtokens { TokenMode::Subtokens } else { TokenMode::FullNames };
            let seqs: Vec<FunctionSequence> = rows
                .into_iter()
                .map(|(src, name, calls)| FunctionSequence { mode, ..FunctionSequence::new(src, name, calls) })
                .collect();
            let mut buf = Vec::new();
            write_sequences_to(&mut buf, &seqs).unwrap();
            prop_assert_eq!(read_sequences_from(&buf[..]).unwrap(), seqs);
        }
    }
}
