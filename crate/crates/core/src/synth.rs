//! Synthetic stand-in corpora with planted, lexicon-verified labels.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{weak_label, UnifiedRecord};
use crate::{Error, Label, Language, LexiconSet, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub counts: BTreeMap<Language, usize>,
    /// Class shares in label order: hate, abusive, neither.
    pub mixture: [f64; 3],
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(counts: &[(Language, usize)], mixture: [f64; 3], seed: u64) -> Self {
        Self { counts: counts.iter().copied().collect(), mixture, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mixture.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Synth("mixture shares must be finite and non-negative".into()));
        }
        let sum: f64 = self.mixture.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Synth(format!("mixture sums to {sum}, expected 1")));
        }
        if self.counts.is_empty() || self.counts.values().any(|&n| n == 0) {
            return Err(Error::Synth("every language needs a positive record count".into()));
        }
        Ok(())
    }
}

/// Per-class counts by largest remainder; ties go to the earlier class.
pub fn class_counts(n: usize, mixture: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = mixture.iter().map(|p| p * n as f64).collect();
    let mut counts = [0usize; 3];
    for (c, e) in exact.iter().enumerate() {
        counts[c] = e.floor() as usize;
    }
    let mut left = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for c in order {
        if left == 0 {
            break;
        }
        counts[c] += 1;
        left -= 1;
    }
    counts
}

struct Bank {
    neutral: &'static [&'static str],
    groups: &'static [&'static str],
    hate_frames: &'static [&'static str],
    abuse_frames: &'static [&'static str],
}

const EN: Bank = Bank {
    neutral: &[
        "the bus was late again this morning",
        "watched the match with my friends last night",
        "new coffee place downtown is pretty good",
        "cannot wait for the weekend",
        "the weather is lovely today",
        "just finished reading a great book",
        "traffic on the highway is terrible",
        "our team won the game yesterday",
        "the election debate starts at nine",
        "made pasta for dinner tonight",
        "the train station was crowded",
        "working from home again today",
        "the new phone update is out",
        "happy birthday to my little sister",
        "the park is full of kids playing",
        "reading the news about the budget",
        "the concert tickets sold out fast",
        "my flight got delayed by two hours",
        "the market opened higher this week",
        "learning to cook rice properly",
    ],
    groups: &["those people", "immigrants", "these migrants", "refugees", "that community", "foreigners"],
    hate_frames: &[
        "{g} are {s}",
        "{n} and {g} are nothing but {s}",
        "{g} are {s} and should leave",
        "all {g} are {s}",
        "{s} like {g} ruin everything",
    ],
    abuse_frames: &[
        "{n} what a {a}",
        "this {a} referee ruined it",
        "{n} you {a}",
        "shut up you {a}",
        "{a} {n}",
    ],
};

const CODEMIX: Bank = Bank {
    neutral: &[
        "aaj mausam bahut accha hai",
        "kal match dekhne chalenge",
        "mujhe chai pasand hai",
        "bus phir se late thi yaar",
        "ghar pe khana bana raha hoon",
        "kitna traffic hai aaj",
        "naya phone bahut mast hai",
        "weekend ka plan kya hai",
        "exam ke liye padhai kar raha hoon",
        "shaadi mein bahut maza aaya",
        "movie kaafi acchi thi",
        "train time pe aa gayi",
        "dost ke saath bahar ja raha hoon",
        "election ki news dekhi kya",
        "cricket team ne accha khela",
        "barish ho rahi hai bahar",
    ],
    groups: &["ye log", "woh log", "in logon", "ye sab", "unki community"],
    hate_frames: &[
        "{g} {s} hai",
        "{n} aur {g} sab {s} hain",
        "{g} {s} hain inko bhagao",
        "saare {g} {s} hain",
    ],
    abuse_frames: &[
        "{n} {a}",
        "abe {a} chup kar",
        "tu {a} hai yaar",
        "{a} {n}",
    ],
};

const HI: Bank = Bank {
    neutral: &[
        "आज मौसम बहुत अच्छा है।",
        "कल मैच देखने चलेंगे।",
        "मुझे चाय पसंद है।",
        "बस फिर से देर से आई।",
        "घर पर खाना बना रहा हूँ।",
        "आज सड़क पर बहुत भीड़ है।",
        "नई किताब पढ़ रहा हूँ।",
        "सप्ताहांत की योजना क्या है",
        "परीक्षा की तैयारी चल रही है।",
        "शादी में बहुत मज़ा आया।",
        "फ़िल्म काफ़ी अच्छी थी।",
        "बाहर बारिश हो रही है।",
        "चुनाव की खबर देखी क्या",
        "टीम ने अच्छा खेला।",
    ],
    groups: &["ये लोग", "वो लोग", "इन लोगों", "ये सब"],
    hate_frames: &[
        "{g} {s} हैं",
        "{n} और {g} सब {s} हैं",
        "{g} {s} हैं इन्हें भगाओ",
        "सारे {g} {s} हैं।",
    ],
    abuse_frames: &["{n} {a}", "चुप कर {a}", "तू {a} है", "{a} {n}"],
};

fn bank(lang: Language) -> &'static Bank {
    match lang {
        Language::En => &EN,
        Language::HiCodemix => &CODEMIX,
        Language::Hi => &HI,
    }
}

fn slurs_for(lx: &LexiconSet, lang: Language) -> Vec<String> {
    let mut v: Vec<String> = lx.slurs.iter().filter(|(_, l)| **l == lang).map(|(w, _)| w.clone()).collect();
    v.sort();
    v
}

fn abusive_for(lx: &LexiconSet, lang: Language) -> Vec<String> {
    let mut v: Vec<String> = lx
        .profanity
        .iter()
        .filter_map(|p| match (lang, p.language, &p.devanagari) {
            (Language::Hi, Language::HiCodemix, Some(d)) => Some(d.clone()),
            (Language::Hi, Language::Hi, _) => Some(p.word.clone()),
            (l, pl, _) if l == pl && l != Language::Hi => Some(p.word.clone()),
            _ => None,
        })
        .collect();
    v.sort();
    v.dedup();
    v
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.gen_range(0..xs.len())]
}

fn render(frame: &str, rng: &mut ChaCha8Rng, b: &Bank, s: &str, a: &str) -> String {
    frame
        .replace("{n}", pick(rng, b.neutral))
        .replace("{g}", pick(rng, b.groups))
        .replace("{s}", s)
        .replace("{a}", a)
}

/// Generates `spec.counts` records per language with class counts from the
/// mixture. Hate records always carry a slur, abusive ones a profane word,
/// clean ones neither; every label is cross-checked with [`weak_label`].
pub fn generate_synthetic_corpus(spec: &SynthSpec, lexicons: &LexiconSet) -> Result<Vec<UnifiedRecord>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    let mut next_id = 0u64;
    for (&lang, &n) in &spec.counts {
        let b = bank(lang);
        let slurs = slurs_for(lexicons, lang);
        let abusive = abusive_for(lexicons, lang);
        let counts = class_counts(n, &spec.mixture);
        if counts[0] > 0 && slurs.is_empty() {
            return Err(Error::Synth(format!("no slurs for {}", lang.as_str())));
        }
        if counts[1] > 0 && abusive.is_empty() {
            return Err(Error::Synth(format!("no abusive words for {}", lang.as_str())));
        }
        let mut labels: Vec<Label> = Label::ALL
            .iter()
            .zip(counts)
            .flat_map(|(&l, c)| std::iter::repeat_n(l, c))
            .collect();
        labels.shuffle(&mut rng);
        for label in labels {
            let text = match label {
                Label::Hate => {
                    let s = pick(&mut rng, &slurs).clone();
                    render(pick(&mut rng, b.hate_frames), &mut rng, b, &s, "")
                }
                Label::Abusive => {
                    let a = pick(&mut rng, &abusive).clone();
                    render(pick(&mut rng, b.abuse_frames), &mut rng, b, "", &a)
                }
                Label::Neither => {
                    let first = pick(&mut rng, b.neutral);
                    if rng.gen_bool(0.5) {
                        format!("{first} {}", pick(&mut rng, b.neutral))
                    } else {
                        first.to_string()
                    }
                }
            };
            let checked = weak_label(&text, lexicons)?;
            if checked != label {
                return Err(Error::Synth(format!(
                    "planted {} but rules say {} for {text:?}",
                    label.as_str(),
                    checked.as_str()
                )));
            }
            out.push(UnifiedRecord {
                id: next_id,
                text,
                label,
                language: lang,
                source_id: format!("synth-{}", lang.as_str()),
            });
            next_id += 1;
        }
    }
    Ok(out)
}
