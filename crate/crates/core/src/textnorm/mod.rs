//! Social-text normalization: entity placeholders, annotation markers,
//! contraction/emoticon/slang expansion, hashtag segmentation and
//! language-aware tokenization, chained by [`pipeline`].

mod entities;
mod expand;
mod markers;
mod segment;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use entities::{normalize_entities, normalize_entities_with, EntityKind, EntityToggles};
pub use expand::{expand_contractions, expand_emoticons};
pub use markers::{annotate_markers, MarkerToggles, ANNOTATIONS, CENSORED};
pub use segment::{segment_body, segment_hashtag, word_score};
pub use tokenize::{tokenize, Token, TokenKind};

use crate::{Language, LexiconSet};

pub const DEFAULT_CAP: usize = 128;

pub const PLACEHOLDERS: [&str; 9] = [
    "<url>", "<email>", "<user>", "<money>", "<percent>", "<phone>", "<time>", "<date>", "<number>",
];

pub(crate) fn is_special(tok: &str) -> bool {
    PLACEHOLDERS.contains(&tok) || ANNOTATIONS.contains(&tok)
}

/// Splits leading opening punctuation and trailing closing punctuation off a
/// whitespace token.
pub(crate) fn split_affixes(tok: &str) -> (&str, &str, &str) {
    let core_start = tok
        .char_indices()
        .find(|(_, c)| !matches!(c, '"' | '\'' | '(' | '[' | '{'))
        .map_or(tok.len(), |(i, _)| i);
    let rest = &tok[core_start..];
    let core_len = rest
        .trim_end_matches(['.', ',', '!', '?', ';', ':', '"', '\'', ')', ']', '}'])
        .len();
    (&tok[..core_start], &rest[..core_len], &rest[core_len..])
}

/// Full stage configuration. Every switch is explicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub language: Language,
    pub entities: EntityToggles,
    pub markers: MarkerToggles,
    pub contractions: bool,
    pub emoticons: bool,
    pub segment_hashtags: bool,
    pub cap: usize,
}

impl NormConfig {
    pub fn new(language: Language) -> Self {
        Self {
            language,
            entities: EntityToggles::ALL_ON,
            markers: MarkerToggles::default(),
            contractions: true,
            emoticons: true,
            segment_hashtags: true,
            cap: DEFAULT_CAP,
        }
    }
}

/// Runs entity normalization, marker annotation, contraction and emoticon
/// expansion, hashtag segmentation and tokenization in that order, then
/// truncates to `config.cap` tokens.
pub fn pipeline(text: &str, config: &NormConfig, lexicons: &LexiconSet) -> Vec<Token> {
    let text = normalize_entities_with(text, &config.entities);
    let text = annotate_markers(&text, lexicons, &config.markers);
    let english_family = config.language != Language::Hi;

    let mut chunks: Vec<(String, TokenKind)> = Vec::new();
    for raw in text.split_whitespace() {
        let mut chunk = raw.to_string();
        if config.contractions && english_family {
            if let Some(e) = expand::expand_contraction_token(&chunk, lexicons) {
                chunk = e;
            }
        }
        if config.emoticons {
            if let Some(e) = expand::expand_emoticon_token(&chunk, lexicons) {
                chunks.extend(e.split_whitespace().map(|w| (w.to_string(), TokenKind::EmoticonExpansion)));
                continue;
            }
        }
        for piece in chunk.split_whitespace() {
            push_hashtag_aware(piece, config, lexicons, &mut chunks);
        }
    }

    let mut out = Vec::new();
    for (chunk, kind) in &chunks {
        if out.len() >= config.cap {
            break;
        }
        tokenize::tokenize_chunk(chunk, config.language, *kind, &mut out);
    }
    out.truncate(config.cap);
    out
}

fn push_hashtag_aware(
    piece: &str,
    config: &NormConfig,
    lexicons: &LexiconSet,
    chunks: &mut Vec<(String, TokenKind)>,
) {
    let tag_len = piece
        .strip_prefix('#')
        .map(|body| {
            1 + body
                .char_indices()
                .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || is_mark(*c)))
                .map_or(body.len(), |(i, _)| i)
        })
        .unwrap_or(0);
    if !config.segment_hashtags || tag_len <= 1 {
        chunks.push((piece.to_string(), TokenKind::Word));
        return;
    }
    if config.markers.hashtag {
        chunks.push((markers::HASHTAG.to_string(), TokenKind::Annotation));
    }
    for w in segment_hashtag(&piece[..tag_len], &lexicons.unigrams) {
        chunks.push((w, TokenKind::HashtagSegment));
    }
    if tag_len < piece.len() {
        chunks.push((piece[tag_len..].to_string(), TokenKind::Word));
    }
}

fn is_mark(c: char) -> bool {
    ('\u{0900}'..='\u{0963}').contains(&c) || ('\u{0966}'..='\u{097F}').contains(&c)
}
