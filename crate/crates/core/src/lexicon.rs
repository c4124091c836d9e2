//! Plain-text lexicons shared by normalization, features, weak labeling and
//! language routing.
//!
//! Every file is UTF-8 with one entry per line, `key<TAB>value[<TAB>score]`.
//! Blank lines are skipped. Keys must be unique within a file.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::{Error, Language, Result};

const FILES: [&str; 10] = [
    "contractions.tsv",
    "emoticons.tsv",
    "slang.tsv",
    "abusive.tsv",
    "profanity.tsv",
    "slurs.tsv",
    "stereotypes.tsv",
    "hashtags.tsv",
    "unigrams.tsv",
    "codemix.tsv",
];

const BUNDLED: [&str; 10] = [
    include_str!("../lexicons/contractions.tsv"),
    include_str!("../lexicons/emoticons.tsv"),
    include_str!("../lexicons/slang.tsv"),
    include_str!("../lexicons/abusive.tsv"),
    include_str!("../lexicons/profanity.tsv"),
    include_str!("../lexicons/slurs.tsv"),
    include_str!("../lexicons/stereotypes.tsv"),
    include_str!("../lexicons/hashtags.tsv"),
    include_str!("../lexicons/unigrams.tsv"),
    include_str!("../lexicons/codemix.tsv"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ProfanityEntry {
    pub word: String,
    /// Devanagari spelling for romanized code-mix entries.
    pub devanagari: Option<String>,
    pub score: f64,
    pub language: Language,
}

/// Unigram frequency table used by hashtag segmentation and the elongation rule.
#[derive(Debug, Clone, Default)]
pub struct UnigramModel {
    counts: HashMap<String, u64>,
    total: u64,
}

impl UnigramModel {
    pub fn from_counts<I, S>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut map = HashMap::new();
        let mut total = 0u64;
        for (w, c) in counts {
            let w = w.into();
            if c == 0 {
                return Err(Error::Config(format!("unigram {w:?} has zero frequency")));
            }
            total += c;
            if map.insert(w.clone(), c).is_some() {
                return Err(Error::Config(format!("duplicate unigram {w:?}")));
            }
        }
        Ok(Self { counts: map, total })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    /// Natural-log probability of a known word.
    pub fn log_prob(&self, word: &str) -> Option<f64> {
        self.counts
            .get(word)
            .map(|&c| (c as f64).ln() - (self.total as f64).ln())
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    pub contractions: HashMap<String, String>,
    pub emoticons: HashMap<String, String>,
    pub slang: HashMap<String, String>,
    pub profanity: Vec<ProfanityEntry>,
    /// Every profane surface form (English, romanized and Devanagari) with its score.
    pub profane_forms: HashMap<String, f64>,
    pub slurs: HashMap<String, Language>,
    pub stereotypes: Vec<(Vec<String>, Language)>,
    pub hashtags: HashMap<String, Language>,
    pub unigrams: UnigramModel,
    /// Romanized Hindi function words; together with romanized profanity this
    /// is the code-mix evidence lexicon.
    pub codemix_words: HashSet<String>,
}

struct Entry<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

fn entries<'a>(name: &str, text: &'a str, min_fields: usize) -> Result<Vec<Entry<'a>>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < min_fields || fields.len() > 3 {
            return Err(Error::Lexicon {
                path: name.to_string(),
                line: i + 1,
                reason: format!("expected {min_fields}..=3 tab-separated fields"),
            });
        }
        if !seen.insert(fields[0]) {
            return Err(Error::Lexicon {
                path: name.to_string(),
                line: i + 1,
                reason: format!("duplicate key {:?}", fields[0]),
            });
        }
        out.push(Entry { line: i + 1, fields });
    }
    Ok(out)
}

fn score(name: &str, e: &Entry<'_>, idx: usize) -> Result<f64> {
    let bad = |reason: String| Error::Lexicon {
        path: name.to_string(),
        line: e.line,
        reason,
    };
    let raw = e.fields.get(idx).ok_or_else(|| bad("missing score".into()))?;
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| bad(format!("bad score {raw:?}")))?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(bad(format!("score must be >= 0, got {v}")));
    }
    Ok(v)
}

fn language(name: &str, e: &Entry<'_>, idx: usize) -> Result<Language> {
    e.fields[idx].parse().map_err(|_| Error::Lexicon {
        path: name.to_string(),
        line: e.line,
        reason: format!("bad language {:?}", e.fields[idx]),
    })
}

fn pairs(name: &str, text: &str, lowercase: bool) -> Result<HashMap<String, String>> {
    Ok(entries(name, text, 2)?
        .into_iter()
        .map(|e| {
            let k = if lowercase {
                e.fields[0].to_lowercase()
            } else {
                e.fields[0].to_string()
            };
            (k, e.fields[1].to_string())
        })
        .collect())
}

impl LexiconSet {
    /// The lexicons compiled into the binary.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled lexicons are valid")
    }

    /// Loads the ten lexicon files from `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut texts = Vec::with_capacity(FILES.len());
        for f in FILES {
            let p = dir.join(f);
            texts.push(fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?);
        }
        let arr: [&str; 10] = std::array::from_fn(|i| texts[i].as_str());
        Self::parse(arr)
    }

    fn parse(texts: [&str; 10]) -> Result<Self> {
        let [contractions, emoticons, slang, abusive, profanity, slurs, stereotypes, hashtags, unigrams, codemix] =
            texts;
        let mut set = LexiconSet {
            contractions: pairs(FILES[0], contractions, true)?,
            emoticons: pairs(FILES[1], emoticons, false)?,
            slang: pairs(FILES[2], slang, true)?,
            ..Default::default()
        };

        for e in entries(FILES[3], abusive, 3)? {
            let word = e.fields[0].to_lowercase();
            let s = score(FILES[3], &e, 2)?;
            set.profane_forms.insert(word.clone(), s);
            set.profanity.push(ProfanityEntry {
                word,
                devanagari: None,
                score: s,
                language: language(FILES[3], &e, 1)?,
            });
        }
        for e in entries(FILES[4], profanity, 3)? {
            let word = e.fields[0].to_lowercase();
            let deva = e.fields[1].to_string();
            let s = score(FILES[4], &e, 2)?;
            set.profane_forms.insert(word.clone(), s);
            set.profane_forms.insert(deva.clone(), s);
            set.profanity.push(ProfanityEntry {
                word,
                devanagari: Some(deva),
                score: s,
                language: Language::HiCodemix,
            });
        }
        for e in entries(FILES[5], slurs, 2)? {
            set.slurs
                .insert(e.fields[0].to_lowercase(), language(FILES[5], &e, 1)?);
        }
        for e in entries(FILES[6], stereotypes, 2)? {
            let phrase: Vec<String> = e.fields[0]
                .split_whitespace()
                .map(str::to_lowercase)
                .collect();
            set.stereotypes.push((phrase, language(FILES[6], &e, 1)?));
        }
        for e in entries(FILES[7], hashtags, 2)? {
            let tag = e.fields[0].to_lowercase();
            if !tag.starts_with('#') {
                return Err(Error::Lexicon {
                    path: FILES[7].into(),
                    line: e.line,
                    reason: "hashtag must start with '#'".into(),
                });
            }
            set.hashtags.insert(tag, language(FILES[7], &e, 1)?);
        }
        let mut counts = Vec::new();
        for e in entries(FILES[8], unigrams, 2)? {
            let c: u64 = e.fields[1].trim().parse().map_err(|_| Error::Lexicon {
                path: FILES[8].into(),
                line: e.line,
                reason: format!("bad frequency {:?}", e.fields[1]),
            })?;
            if c == 0 {
                return Err(Error::Lexicon {
                    path: FILES[8].into(),
                    line: e.line,
                    reason: "frequency must be > 0".into(),
                });
            }
            counts.push((e.fields[0].to_lowercase(), c));
        }
        set.unigrams = UnigramModel::from_counts(counts)?;
        set.codemix_words = entries(FILES[9], codemix, 2)?
            .into_iter()
            .map(|e| e.fields[0].to_lowercase())
            .collect();
        Ok(set)
    }

    /// Writes the lexicons to `dir` in the same file layout [`Self::from_dir`] reads.
    pub fn write_bundled(dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in FILES.iter().zip(BUNDLED) {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }

    /// Code-mix evidence: romanized function words plus romanized profanity.
    pub fn is_codemix_word(&self, token: &str) -> bool {
        self.codemix_words.contains(token)
            || self
                .profanity
                .iter()
                .any(|p| p.devanagari.is_some() && p.word == token)
    }

    pub fn profanity_score(&self, token: &str) -> Option<f64> {
        self.profane_forms.get(token).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicons_load() {
        let lx = LexiconSet::bundled();
        assert_eq!(lx.contractions["can't"], "cannot");
        assert_eq!(lx.contractions["we'll"], "we will");
        assert_eq!(lx.emoticons[":)"], "happy");
        assert_eq!(lx.slang["idk"], "i do not know");
        assert!(lx.unigrams.contains("miss") && lx.unigrams.contains("america"));
        assert!(lx.profane_forms.values().all(|&s| s >= 0.0));
        assert!(lx.is_codemix_word("hoon"));
        assert!(lx.is_codemix_word("madarchod"));
        assert!(!lx.is_codemix_word("the"));
        assert_eq!(lx.profanity_score("मादरचोद"), lx.profanity_score("madarchod"));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = entries("x.tsv", "a\tb\na\tc\n", 2).err().unwrap();
        assert!(matches!(err, Error::Lexicon { line: 2, .. }));
    }

    #[test]
    fn dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        LexiconSet::write_bundled(dir.path()).unwrap();
        let lx = LexiconSet::from_dir(dir.path()).unwrap();
        assert_eq!(lx.slurs.len(), LexiconSet::bundled().slurs.len());
    }

    #[test]
    fn negative_score_rejected() {
        let mut texts = BUNDLED;
        texts[3] = "bad\ten\t-1\n";
        assert!(LexiconSet::parse(texts).is_err());
    }
}
