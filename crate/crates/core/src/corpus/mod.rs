//! Source files → method-scoped call sequences → vocabulary.

mod extract;
mod lexer;
mod seqfile;
mod subtoken;
mod vocab;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use extract::{extract_sequences, project_of, Extraction, FunctionSequence, TokenMode, TokenizerConfig};
pub use lexer::is_keyword;
pub use seqfile::{read_sequences, read_sequences_from, write_sequences, write_sequences_to};
pub use subtoken::split_subtokens;
pub use vocab::{default_min_count, VocabStats, Vocabulary, UNK};

use crate::error::Result;

const SOURCE_EXTENSIONS: &[&str] = &["java", "kt", "scala", "groovy", "cs"];

fn collect_sources(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        if entry.file_type()?.is_dir() {
            collect_sources(&path, out)?;
        } else if path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| SOURCE_EXTENSIONS.contains(&e))
        {
            out.push(path);
        }
    }
    Ok(())
}

/// Extract every source file under `root`, in parallel.
///
/// Source ids are paths relative to `root` with `/` separators, so the first
/// component names the project. Output order follows the sorted file list
/// regardless of worker count.
pub fn extract_tree(root: &Path, config: &TokenizerConfig) -> Result<Extraction> {
    let mut files = Vec::new();
    collect_sources(root, &mut files)?;
    let per_file: Vec<Result<Extraction>> = files
        .par_iter()
        .map(|path| {
            let bytes = fs::read(path)?;
            let text = String::from_utf8_lossy(&bytes);
            let rel = path.strip_prefix(root).unwrap_or(path);
            let id = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            Ok(extract_sequences(&id, &text, config))
        })
        .collect();
    let mut merged = Extraction::default();
    for ex in per_file {
        let ex = ex?;
        merged.sequences.extend(ex.sequences);
        merged.call_offsets.extend(ex.call_offsets);
        merged.diagnostics.extend(ex.diagnostics);
    }
    Ok(merged)
}
