//! Camel-case / snake-case identifier splitting.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Lower,
    Upper,
    Digit,
    Sep,
}

fn class_of(c: char) -> Class {
    if c == '_' || c == '$' {
        Class::Sep
    } else if c.is_ascii_digit() || c.is_numeric() {
        Class::Digit
    } else if c.is_uppercase() {
        Class::Upper
    } else {
        // lowercase and caseless letters
        Class::Lower
    }
}

/// Split an identifier into subtokens.
///
/// Boundaries are lower→upper transitions, underscores (and `$`),
/// letter↔digit transitions, and the end of an upper-case run that is
/// followed by a capitalized word (`HTTPFrame` → `HTTP`, `Frame`).
/// A name made only of separators is returned unchanged.
pub fn split_subtokens(name: &str, lowercase: bool) -> Vec<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut parts: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut prev: Option<Class> = None;

    for (i, &c) in chars.iter().enumerate() {
        let cls = class_of(c);
        if cls == Class::Sep {
            if !current.is_empty() {
                parts.push(std::mem::take(&mut current));
            }
            prev = None;
            continue;
        }
        let boundary = match (prev, cls) {
            (Some(Class::Lower), Class::Upper) => true,
            (Some(Class::Lower | Class::Upper), Class::Digit) => true,
            (Some(Class::Digit), Class::Lower | Class::Upper) => true,
            (Some(Class::Upper), Class::Upper) => chars.get(i + 1).is_some_and(|&n| class_of(n) == Class::Lower),
            _ => false,
        };
        if boundary && !current.is_empty() {
            parts.push(std::mem::take(&mut current));
        }
        current.push(c);
        prev = Some(cls);
    }
    if !current.is_empty() {
        parts.push(current);
    }
    if parts.is_empty() {
        return vec![name.to_string()];
    }
    if lowercase {
        for p in &mut parts {
            *p = p.to_lowercase();
        }
    }
    parts
}
