//! A forgiving lexer for Java-family sources.
//!
//! Only identifiers, keywords and single-character punctuation survive.
//! Comments, string/char/text-block literals and numbers are consumed and
//! dropped. Malformed input (an unterminated literal or comment) ends the
//! token stream at that point instead of failing.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Punct(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub offset: usize,
}

impl<'a> Token<'a> {
    pub fn is_punct(&self, c: u8) -> bool {
        self.kind == TokenKind::Punct(c)
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Ident
    }

    pub fn is_word(&self, w: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == w
    }
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
    "var",
    "yield",
    "record",
    "sealed",
    "permits",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Tokenize `src`. The second element is a diagnostic when the input ended
/// inside a comment or literal.
pub fn tokenize(src: &str) -> (Vec<Token<'_>>, Option<String>) {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if b == b'/' && bytes.get(i + 1) == Some(&b'*') {
            match src[i + 2..].find("*/") {
                Some(end) => i = i + 2 + end + 2,
                None => return (tokens, Some(format!("unterminated comment at byte {i}"))),
            }
            continue;
        }
        if b == b'"' {
            if src[i..].starts_with("\"\"\"") {
                match src[i + 3..].find("\"\"\"") {
                    Some(end) => i = i + 3 + end + 3,
                    None => return (tokens, Some(format!("unterminated text block at byte {i}"))),
                }
                continue;
            }
            match skip_quoted(bytes, i, b'"') {
                Some(next) => i = next,
                None => return (tokens, Some(format!("unterminated string at byte {i}"))),
            }
            continue;
        }
        if b == b'\'' {
            match skip_quoted(bytes, i, b'\'') {
                Some(next) => i = next,
                None => return (tokens, Some(format!("unterminated char literal at byte {i}"))),
            }
            continue;
        }
        if b.is_ascii_digit() {
            // numbers, including 0x1F, 1_000L, 1.5e-3f
            i += 1;
            while i < bytes.len() {
                let c = bytes[i];
                let exponent_sign = (c == b'+' || c == b'-') && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P');
                if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            continue;
        }
        let ch = src[i..].chars().next().expect("in bounds");
        if is_ident_start(ch) {
            let start = i;
            let mut end = i;
            for (off, c) in src[i..].char_indices() {
                if is_ident_continue(c) {
                    end = i + off + c.len_utf8();
                } else {
                    break;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Ident,
                text: &src[start..end],
                offset: start,
            });
            i = end;
            continue;
        }
        if b.is_ascii() {
            tokens.push(Token {
                kind: TokenKind::Punct(b),
                text: &src[i..i + 1],
                offset: i,
            });
            i += 1;
        } else {
            // stray non-ASCII symbol
            i += ch.len_utf8();
        }
    }
    (tokens, None)
}

fn skip_quoted(bytes: &[u8], start: usize, quote: u8) -> Option<usize> {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return None,
            c if c == quote => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}
