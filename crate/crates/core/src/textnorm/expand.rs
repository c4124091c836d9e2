use super::{is_special, split_affixes};
use crate::LexiconSet;

/// Replaces every contraction key with its expansion. Matching ignores case
/// and typographic apostrophes; surrounding punctuation is kept.
pub fn expand_contractions(text: &str, lexicons: &LexiconSet) -> String {
    map_tokens(text, |tok| expand_contraction_token(tok, lexicons))
}

pub(crate) fn expand_contraction_token(tok: &str, lexicons: &LexiconSet) -> Option<String> {
    if is_special(tok) {
        return None;
    }
    let (lead, core, trail) = split_affixes(tok);
    let key = core.replace('\u{2019}', "'").to_lowercase();
    lexicons
        .contractions
        .get(&key)
        .map(|exp| format!("{lead}{exp}{trail}"))
}

/// Replaces emoticons and slang with the expression words from the lexicon.
pub fn expand_emoticons(text: &str, lexicons: &LexiconSet) -> String {
    map_tokens(text, |tok| expand_emoticon_token(tok, lexicons))
}

pub(crate) fn expand_emoticon_token(tok: &str, lexicons: &LexiconSet) -> Option<String> {
    if let Some(e) = lexicons.emoticons.get(tok) {
        return Some(e.clone());
    }
    if is_special(tok) {
        return None;
    }
    let (lead, core, trail) = split_affixes(tok);
    lexicons
        .slang
        .get(&core.to_lowercase())
        .map(|exp| format!("{lead}{exp}{trail}"))
}

fn map_tokens(text: &str, f: impl Fn(&str) -> Option<String>) -> String {
    text.split_whitespace()
        .map(|t| f(t).unwrap_or_else(|| t.to_string()))
        .collect::<Vec<_>>()
        .join(" ")
}
