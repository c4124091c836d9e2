use serde::{Deserialize, Serialize};

use super::{is_special, split_affixes};
use crate::LexiconSet;

/// Annotation classes. `hashtag` only controls the `<hashtag>` marker emitted
/// in front of segmented hashtags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerToggles {
    pub allcaps: bool,
    pub elongated: bool,
    pub repeated: bool,
    pub emphasis: bool,
    pub censored: bool,
    pub hashtag: bool,
}

impl Default for MarkerToggles {
    fn default() -> Self {
        Self {
            allcaps: true,
            elongated: true,
            repeated: true,
            emphasis: true,
            censored: true,
            hashtag: false,
        }
    }
}

pub const ALLCAPS: &str = "<allcaps>";
pub const ELONGATED: &str = "<elongated>";
pub const REPEATED: &str = "<repeated>";
pub const EMPHASIS: &str = "<emphasis>";
pub const CENSORED: &str = "<censored>";
pub const HASHTAG: &str = "<hashtag>";

pub const ANNOTATIONS: [&str; 6] = [ALLCAPS, ELONGATED, REPEATED, EMPHASIS, CENSORED, HASHTAG];

/// Lowercases words and appends annotation markers after the affected token.
pub fn annotate_markers(text: &str, lexicons: &LexiconSet, toggles: &MarkerToggles) -> String {
    let raw: Vec<&str> = text.split_whitespace().collect();
    let mut out: Vec<String> = Vec::with_capacity(raw.len());
    let mut i = 0;
    while i < raw.len() {
        let tok = raw[i];
        let mut run = 1;
        if toggles.repeated && !is_special(tok) {
            while i + run < raw.len() && raw[i + run].to_lowercase() == tok.to_lowercase() {
                run += 1;
            }
        }
        out.push(annotate_token(tok, lexicons, toggles));
        if run > 1 {
            out.push(REPEATED.to_string());
        }
        i += run;
    }
    out.join(" ")
}

fn annotate_token(tok: &str, lexicons: &LexiconSet, toggles: &MarkerToggles) -> String {
    if is_special(tok) || tok.starts_with('#') || lexicons.emoticons.contains_key(tok) {
        return tok.to_string();
    }
    let (lead, core, trail) = split_affixes(tok);
    let letters = core.chars().filter(|c| c.is_alphabetic()).count();

    if toggles.censored && letters > 0 && core.contains('*') && !is_emphasis(core) {
        return format!("{lead}{CENSORED}{trail}");
    }

    let mut markers: Vec<&str> = Vec::new();
    let mut word = core;
    if toggles.emphasis && is_emphasis(core) {
        word = &core[1..core.len() - 1];
        markers.push(EMPHASIS);
    }

    let is_caps = letters >= 2
        && word.chars().any(|c| c.is_uppercase())
        && !word.chars().any(|c| c.is_lowercase());
    if toggles.allcaps && is_caps {
        markers.insert(0, ALLCAPS);
    }
    let mut word = word.to_lowercase();

    if toggles.elongated && has_run(&word, 3) {
        let one = collapse_runs(&word, 1);
        word = if lexicons.unigrams.contains(&one) {
            one
        } else {
            collapse_runs(&word, 2)
        };
        markers.push(ELONGATED);
    }

    let mut s = format!("{lead}{word}{trail}");
    for m in markers {
        s.push(' ');
        s.push_str(m);
    }
    s
}

fn is_emphasis(core: &str) -> bool {
    core.len() >= 3
        && core.starts_with('*')
        && core.ends_with('*')
        && {
            let inner = &core[1..core.len() - 1];
            !inner.contains('*') && inner.chars().any(char::is_alphabetic)
        }
}

fn has_run(word: &str, min: usize) -> bool {
    let mut prev = None;
    let mut n = 0;
    for c in word.chars() {
        if Some(c) == prev {
            n += 1;
        } else {
            prev = Some(c);
            n = 1;
        }
        if n >= min && c.is_alphabetic() {
            return true;
        }
    }
    false
}

/// Collapses every run of three or more identical letters down to `keep`.
fn collapse_runs(word: &str, keep: usize) -> String {
    let chars: Vec<char> = word.chars().collect();
    let mut out = String::with_capacity(word.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut j = i;
        while j < chars.len() && chars[j] == c {
            j += 1;
        }
        let n = j - i;
        let emit = if n >= 3 && c.is_alphabetic() { keep } else { n };
        out.extend(std::iter::repeat_n(c, emit));
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(s: &str) -> String {
        annotate_markers(s, &LexiconSet::bundled(), &MarkerToggles::default())
    }

    #[test]
    fn examples() {
        assert_eq!(ann("I am SO mad"), "i am so <allcaps> mad");
        assert_eq!(ann("f**k off"), "<censored> off");
        assert_eq!(ann("no no no"), "no <repeated>");
        assert_eq!(ann("HELLO"), "hello <allcaps>");
        assert_eq!(ann("sooooo"), "so <elongated>");
        assert_eq!(ann("*word*"), "word <emphasis>");
    }

    #[test]
    fn elongation_falls_back_to_two_letters() {
        // "cool" collapses to "col" (unknown) so runs keep two letters.
        assert_eq!(ann("cooool"), "cool <elongated>");
    }

    #[test]
    fn placeholders_and_hashtags_untouched() {
        assert_eq!(ann("<user> <user> #MissAmerica"), "<user> <user> #MissAmerica");
    }

    #[test]
    fn censored_keeps_trailing_punctuation() {
        assert_eq!(ann("b** .."), "<censored> ..");
        assert_eq!(ann("sh**!"), "<censored>!");
    }

    #[test]
    fn emoticons_not_lowercased() {
        assert_eq!(ann("XD lol"), "XD lol");
    }

    #[test]
    fn toggles_off_only_lowercase() {
        let off = MarkerToggles {
            allcaps: false,
            elongated: false,
            repeated: false,
            emphasis: false,
            censored: false,
            hashtag: false,
        };
        assert_eq!(
            annotate_markers("NO NO f**k", &LexiconSet::bundled(), &off),
            "no no f**k"
        );
    }
}
