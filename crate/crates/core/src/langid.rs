//! Script and lexicon based language routing.

use serde::{Deserialize, Serialize};

use crate::{Error, Language, LexiconSet, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutingThresholds {
    /// Minimum share of Devanagari letters for `hi`.
    pub devanagari: f64,
    /// Minimum share of code-mix lexicon hits among Latin words for `hi_codemix`.
    pub codemix: f64,
}

impl Default for RoutingThresholds {
    fn default() -> Self {
        Self { devanagari: 0.30, codemix: 0.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub language: Language,
    pub devanagari_fraction: f64,
    pub codemix_hit_rate: f64,
    pub thresholds: RoutingThresholds,
}

/// Devanagari letters and signs, excluding danda, double danda and digits.
pub fn is_devanagari_letter(c: char) -> bool {
    matches!(c, '\u{0900}'..='\u{0963}' | '\u{0970}'..='\u{097F}' | '\u{A8E0}'..='\u{A8FF}')
}

/// Share of letters that are Devanagari. Letters are alphabetic chars plus
/// Devanagari signs; 0 when the text has no letters.
pub fn devanagari_fraction(text: &str) -> f64 {
    let (mut deva, mut letters) = (0usize, 0usize);
    for c in text.chars() {
        if is_devanagari_letter(c) {
            deva += 1;
            letters += 1;
        } else if c.is_alphabetic() {
            letters += 1;
        }
    }
    if letters == 0 {
        0.0
    } else {
        deva as f64 / letters as f64
    }
}

/// Share of Latin-script words found in the code-mix evidence lexicon.
pub fn codemix_hit_rate(text: &str, lexicons: &LexiconSet) -> f64 {
    let mut words = 0usize;
    let mut hits = 0usize;
    for raw in text.split(|c: char| !(c.is_alphanumeric() || c == '\'')) {
        let w = raw.trim_matches('\'');
        if w.is_empty() || !w.chars().any(|c| c.is_ascii_alphabetic()) {
            continue;
        }
        words += 1;
        if lexicons.is_codemix_word(&w.to_lowercase()) {
            hits += 1;
        }
    }
    if words == 0 {
        0.0
    } else {
        hits as f64 / words as f64
    }
}

pub fn detect(text: &str, lexicons: &LexiconSet, thresholds: &RoutingThresholds) -> Result<RoutingDecision> {
    if text.trim().is_empty() {
        return Err(Error::Empty("text"));
    }
    let devanagari_fraction = devanagari_fraction(text);
    let codemix_hit_rate = codemix_hit_rate(text, lexicons);
    let language = if devanagari_fraction >= thresholds.devanagari {
        Language::Hi
    } else if codemix_hit_rate >= thresholds.codemix {
        Language::HiCodemix
    } else {
        Language::En
    };
    Ok(RoutingDecision {
        language,
        devanagari_fraction,
        codemix_hit_rate,
        thresholds: *thresholds,
    })
}
