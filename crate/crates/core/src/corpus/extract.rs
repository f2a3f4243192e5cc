//! Lexical extraction of method-scoped call sequences.
//!
//! The extractor tracks brace depth over the token stream. At class-member
//! depth, `name(params) [throws A, B] {` opens a method; everything up to
//! the matching `}` belongs to that method, including anonymous class and
//! lambda bodies nested inside it.

use serde::{Deserialize, Serialize};

use super::lexer::{is_keyword, tokenize, Token};
use super::subtoken::split_subtokens;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TokenMode {
    #[default]
    FullNames,
    Subtokens,
}

impl TokenMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenMode::FullNames => "full_names",
            TokenMode::Subtokens => "subtokens",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full_names" | "full" => Some(TokenMode::FullNames),
            "subtokens" | "subtoken" => Some(TokenMode::Subtokens),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub mode: TokenMode,
    pub include_constructors: bool,
    pub lowercase_subtokens: bool,
    /// In subtoken mode, also split the method name.
    pub split_method_names: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            mode: TokenMode::FullNames,
            include_constructors: false,
            lowercase_subtokens: true,
            split_method_names: true,
        }
    }
}

impl TokenizerConfig {
    pub fn subtokens() -> Self {
        Self {
            mode: TokenMode::Subtokens,
            ..Self::default()
        }
    }
}

/// One method as an ordered token list: the method name followed by the
/// calls made in its body.
///
/// In subtoken mode the sequence is the flattened subtoken stream, so
/// `method_name` holds only the first subtoken of the name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSequence {
    pub source_id: String,
    pub method_name: String,
    pub calls: Vec<String>,
    /// Byte offsets of the method body, `{` through the matching `}`.
    pub byte_span: (usize, usize),
    pub mode: TokenMode,
}

impl FunctionSequence {
    pub fn new(source_id: impl Into<String>, method_name: impl Into<String>, calls: Vec<String>) -> Self {
        Self {
            source_id: source_id.into(),
            method_name: method_name.into(),
            calls,
            byte_span: (0, 0),
            mode: TokenMode::FullNames,
        }
    }

    /// The method name followed by the calls.
    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        std::iter::once(self.method_name.as_str()).chain(self.calls.iter().map(String::as_str))
    }

    pub fn len(&self) -> usize {
        1 + self.calls.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Project part of the source id (`project/dir/File.java` → `project`).
    pub fn project_id(&self) -> &str {
        project_of(&self.source_id)
    }

    /// Re-express a full-name sequence as subtokens.
    pub fn to_subtokens(&self, lowercase: bool, split_method_name: bool) -> FunctionSequence {
        if self.mode == TokenMode::Subtokens {
            return self.clone();
        }
        let mut units: Vec<String> = if split_method_name {
            split_subtokens(&self.method_name, lowercase)
        } else {
            vec![self.method_name.clone()]
        };
        for call in &self.calls {
            units.extend(split_subtokens(call, lowercase));
        }
        let mut it = units.into_iter();
        let method_name = it.next().unwrap_or_default();
        FunctionSequence {
            source_id: self.source_id.clone(),
            method_name,
            calls: it.collect(),
            byte_span: self.byte_span,
            mode: TokenMode::Subtokens,
        }
    }
}

/// Leading path component of a source id.
pub fn project_of(source_id: &str) -> &str {
    source_id.split('/').next().unwrap_or(source_id)
}

/// Result of extracting one source unit.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub sequences: Vec<FunctionSequence>,
    /// Full-name call offsets per sequence, parallel to `sequences`.
    pub call_offsets: Vec<Vec<usize>>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frame {
    Class,
    Body,
}

struct OpenMethod {
    name: String,
    calls: Vec<String>,
    offsets: Vec<usize>,
    start: usize,
    depth: usize,
}

/// Index just past the `)` matching the `(` at `open`, or `None` at EOF.
fn matching_paren(tokens: &[Token<'_>], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (j, t) in tokens.iter().enumerate().skip(open) {
        if t.is_punct(b'(') {
            depth += 1;
        } else if t.is_punct(b')') {
            depth -= 1;
            if depth == 0 {
                return Some(j + 1);
            }
        }
    }
    None
}

/// If `ident(...)` at `name_idx` is a declaration header ending in `{`,
/// return the index of that `{`.
fn declaration_body(tokens: &[Token<'_>], name_idx: usize) -> Option<usize> {
    let mut j = matching_paren(tokens, name_idx + 1)?;
    if tokens.get(j).is_some_and(|t| t.is_word("throws")) {
        j += 1;
        while let Some(t) = tokens.get(j) {
            if t.is_ident() || t.is_punct(b'.') || t.is_punct(b',') || t.is_punct(b'<') || t.is_punct(b'>') {
                j += 1;
            } else {
                break;
            }
        }
    }
    tokens.get(j).filter(|t| t.is_punct(b'{')).map(|_| j)
}

/// True when the identifier at `idx` is the type of a `new` expression,
/// possibly qualified (`new java.io.File(`).
fn is_constructor(tokens: &[Token<'_>], idx: usize) -> bool {
    let mut j = idx;
    while j >= 2 && tokens[j - 1].is_punct(b'.') && tokens[j - 2].is_ident() {
        j -= 2;
    }
    j >= 1 && tokens[j - 1].is_word("new")
}

fn preceded_by(tokens: &[Token<'_>], idx: usize, c: u8) -> bool {
    idx >= 1 && tokens[idx - 1].is_punct(c)
}

/// Extract one [`FunctionSequence`] per method declared in `source`.
///
/// Never fails: unbalanced input yields the methods that closed properly
/// plus a diagnostic.
pub fn extract_sequences(source_id: &str, source: &str, config: &TokenizerConfig) -> Extraction {
    let (tokens, lex_diag) = tokenize(source);
    let mut out = Extraction::default();
    if let Some(d) = lex_diag {
        out.diagnostics.push(format!("{source_id}: {d}"));
    }

    let mut stack: Vec<Frame> = Vec::new();
    let mut open: Option<OpenMethod> = None;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if t.is_punct(b'{') {
            stack.push(if open.is_some() { Frame::Body } else { Frame::Class });
            i += 1;
            continue;
        }
        if t.is_punct(b'}') {
            if stack.pop().is_none() {
                out.diagnostics
                    .push(format!("{source_id}: unmatched '}}' at byte {}", t.offset));
            }
            if open.as_ref().is_some_and(|m| stack.len() == m.depth) {
                let m = open.take().expect("checked");
                let seq = FunctionSequence {
                    source_id: source_id.to_string(),
                    method_name: m.name,
                    calls: m.calls,
                    byte_span: (m.start, t.offset + 1),
                    mode: TokenMode::FullNames,
                };
                out.sequences.push(seq);
                out.call_offsets.push(m.offsets);
            }
            i += 1;
            continue;
        }
        let followed_by_paren = tokens.get(i + 1).is_some_and(|n| n.is_punct(b'('));
        if !(t.is_ident() && followed_by_paren) || is_keyword(t.text) || preceded_by(&tokens, i, b'@') {
            i += 1;
            continue;
        }

        match open.as_mut() {
            None => {
                let is_decl = !preceded_by(&tokens, i, b'.') && !is_constructor(&tokens, i);
                match declaration_body(&tokens, i).filter(|_| is_decl) {
                    Some(brace) => {
                        open = Some(OpenMethod {
                            name: t.text.to_string(),
                            calls: Vec::new(),
                            offsets: Vec::new(),
                            start: tokens[brace].offset,
                            depth: stack.len(),
                        });
                        stack.push(Frame::Body);
                        i = brace + 1;
                    }
                    None => i += 1,
                }
            }
            Some(m) => {
                let ctor = is_constructor(&tokens, i);
                let nested_decl = !ctor && !preceded_by(&tokens, i, b'.') && declaration_body(&tokens, i).is_some();
                if !nested_decl && (!ctor || config.include_constructors) {
                    m.calls.push(t.text.to_string());
                    m.offsets.push(t.offset);
                }
                i += 1;
            }
        }
    }
    if let Some(m) = open {
        out.diagnostics.push(format!(
            "{source_id}: method '{}' at byte {} is not closed; dropped",
            m.name, m.start
        ));
    } else if !stack.is_empty() {
        out.diagnostics.push(format!(
            "{source_id}: {} unclosed brace(s) at end of input",
            stack.len()
        ));
    }

    if config.mode == TokenMode::Subtokens {
        for seq in &mut out.sequences {
            *seq = seq.to_subtokens(config.lowercase_subtokens, config.split_method_names);
        }
    }
    out
}
