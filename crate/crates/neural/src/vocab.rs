use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::net::PAD;
use crate::{Error, Result};

pub const UNK: u32 = 1;
const PAD_TOKEN: &str = "<pad>";
const UNK_TOKEN: &str = "<unk>";

/// Token ↔ id map for the network input. Id 0 is padding, id 1 unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenIndex {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl TokenIndex {
    /// Keeps the `max_size - 2` most frequent tokens, ties broken lexicographically.
    pub fn build<S: AsRef<str>>(docs: &[Vec<S>], max_size: usize) -> Result<Self> {
        if max_size < 2 {
            return Err(Error::Config("token index needs room for <pad> and <unk>".into()));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for d in docs {
            for t in d {
                *counts.entry(t.as_ref()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(t, _)| *t != PAD_TOKEN && *t != UNK_TOKEN)
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(max_size - 2);
        Self::from_tokens([PAD_TOKEN, UNK_TOKEN].into_iter().chain(ranked.into_iter().map(|(t, _)| t)).map(String::from).collect())
    }

    fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err(Error::Checkpoint("token index must start with <pad>, <unk>".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Checkpoint(format!("duplicate token {t:?}")));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Ids padded or truncated to `cap`.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S], cap: usize) -> Vec<u32> {
        let mut ids: Vec<u32> = tokens.iter().take(cap).map(|t| self.id(t.as_ref())).collect();
        ids.resize(cap, PAD);
        ids
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for t in &self.tokens {
            writeln!(w, "{t}")?;
        }
        w.flush()
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let tokens = r.lines().collect::<std::io::Result<Vec<_>>>()?;
        Self::from_tokens(tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_encode_round_trip() {
        let docs = vec![vec!["b", "a", "a"], vec!["c", "a", "b"]];
        let ix = TokenIndex::build(&docs, 4).unwrap();
        assert_eq!(ix.len(), 4);
        assert_eq!(ix.id("a"), 2);
        assert_eq!(ix.id("b"), 3);
        assert_eq!(ix.id("c"), UNK);
        assert_eq!(ix.encode(&["a", "zzz"], 4), vec![2, 1, 0, 0]);
        let mut buf = Vec::new();
        ix.write(&mut buf).unwrap();
        assert_eq!(TokenIndex::read(&buf[..]).unwrap(), ix);
    }
}
