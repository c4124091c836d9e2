use serde::{Deserialize, Serialize};

use super::{markers::ANNOTATIONS, PLACEHOLDERS};
use crate::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Placeholder,
    Annotation,
    HashtagSegment,
    EmoticonExpansion,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn new(surface: impl Into<String>, kind: TokenKind) -> Self {
        Self {
            surface: surface.into(),
            kind,
        }
    }
}

const DANDA: char = '\u{0964}';
const DOUBLE_DANDA: char = '\u{0965}';
const ABBREVIATION: char = '\u{0970}';

fn is_devanagari(c: char) -> bool {
    ('\u{0900}'..='\u{097F}').contains(&c) || ('\u{A8E0}'..='\u{A8FF}').contains(&c)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
        || c == '_'
        || c == '\u{200C}'
        || c == '\u{200D}'
        || (is_devanagari(c) && !matches!(c, DANDA | DOUBLE_DANDA | ABBREVIATION))
}

fn is_hindi_break(c: char) -> bool {
    matches!(
        c,
        DANDA | DOUBLE_DANDA | ABBREVIATION | ',' | '.' | '?' | '!' | ';' | ':' | '"' | '(' | ')' | '[' | ']' | '{' | '}'
    )
}

/// Tokenizes already-normalized text. Placeholders and annotation markers are
/// kept whole; everything else is typed as [`TokenKind::Word`].
pub fn tokenize(text: &str, language: Language) -> Vec<Token> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        tokenize_chunk(chunk, language, TokenKind::Word, &mut out);
    }
    out
}

/// Kind of a `<...>` marker starting at the beginning of `s`, with its byte length.
fn marker_at(s: &str) -> Option<(TokenKind, usize)> {
    if !s.starts_with('<') {
        return None;
    }
    let end = s.find('>')? + 1;
    let m = &s[..end];
    if PLACEHOLDERS.contains(&m) {
        Some((TokenKind::Placeholder, end))
    } else if ANNOTATIONS.contains(&m) {
        Some((TokenKind::Annotation, end))
    } else {
        None
    }
}

pub(crate) fn tokenize_chunk(chunk: &str, language: Language, kind: TokenKind, out: &mut Vec<Token>) {
    let lowered = chunk.to_lowercase();
    let s = lowered.as_str();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut Vec<Token>| {
        if !word.is_empty() {
            out.push(Token::new(std::mem::take(word), kind));
        }
    };
    let mut i = 0;
    while i < s.len() {
        let rest = &s[i..];
        if let Some((mk, len)) = marker_at(rest) {
            flush(&mut word, out);
            out.push(Token::new(&rest[..len], mk));
            i += len;
            continue;
        }
        let c = rest.chars().next().expect("non-empty");
        let breaks = match language {
            Language::Hi => is_hindi_break(c),
            Language::En | Language::HiCodemix => {
                !is_word_char(c) && !(c == '\'' && inner_apostrophe(&word, &rest[1..]))
            }
        };
        if breaks {
            flush(&mut word, out);
            let run = rest.chars().take_while(|&d| d == c).count();
            let len = run * c.len_utf8();
            out.push(Token::new(&rest[..len], kind));
            i += len;
        } else {
            word.push(c);
            i += c.len_utf8();
        }
    }
    flush(&mut word, out);
}

fn inner_apostrophe(word: &str, after: &str) -> bool {
    !word.is_empty() && after.chars().next().is_some_and(is_word_char)
}
