use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Unified three-class taxonomy. The discriminant order is the fixed class
/// order used by every model (`hate`, `abusive`, `neither`), which is also
/// the severity order used to break ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Hate = 0,
    Abusive = 1,
    Neither = 2,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Hate, Label::Abusive, Label::Neither];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    /// Argmax over class scores in class order; exact ties go to the more
    /// severe class.
    pub fn argmax(scores: &[f64]) -> Label {
        let mut best = 0;
        for i in 1..Label::COUNT.min(scores.len()) {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        Label::ALL[best]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Hate => "hate",
            Label::Abusive => "abusive",
            Label::Neither => "neither",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hate" | "hateful" => Ok(Label::Hate),
            "abusive" | "abuse" | "offensive" => Ok(Label::Abusive),
            "neither" | "normal" | "none" => Ok(Label::Neither),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    En,
    Hi,
    HiCodemix,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::En, Language::Hi, Language::HiCodemix];

    pub fn as_str(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Hi => "hi",
            Language::HiCodemix => "hi_codemix",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "en" => Ok(Language::En),
            "hi" => Ok(Language::Hi),
            "hi_codemix" | "codemix" => Ok(Language::HiCodemix),
            _ => Err(Error::UnknownLanguage(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_order_is_severity_order() {
        assert!(Label::Hate < Label::Abusive && Label::Abusive < Label::Neither);
        assert_eq!(Label::from_index(2), Some(Label::Neither));
        assert_eq!(Label::from_index(3), None);
    }

    #[test]
    fn ties_go_to_severity() {
        assert_eq!(Label::argmax(&[0.4, 0.4, 0.2]), Label::Hate);
        assert_eq!(Label::argmax(&[0.2, 0.4, 0.4]), Label::Abusive);
        assert_eq!(Label::argmax(&[0.3, 0.3, 0.4]), Label::Neither);
        assert_eq!(Label::argmax(&[1.0, 1.0, 1.0]), Label::Hate);
    }

    #[test]
    fn language_tags() {
        for l in Language::ALL {
            assert_eq!(l.as_str().parse::<Language>().unwrap(), l);
        }
        assert!(matches!("fr".parse::<Language>(), Err(Error::UnknownLanguage(_))));
    }
}
