//! TF-IDF n-gram vectors with an optional dense profanity block.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::textnorm::{Token, TokenKind, CENSORED};
use crate::{par, Error, ExecMode, LexiconSet, Result};

/// Width of the auxiliary block: profane-token count, summed profanity
/// score, `<censored>` marker count.
pub const AUX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabParams {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub min_df: usize,
    pub max_size: Option<usize>,
}

impl Default for VocabParams {
    fn default() -> Self {
        Self {
            ngram_min: 1,
            ngram_max: 2,
            min_df: 1,
            max_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocabEntry {
    pub ngram: String,
    pub df: usize,
    pub idf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    params: VocabParams,
    entries: Vec<VocabEntry>,
    index: HashMap<String, u32>,
}

/// Sparse TF-IDF block (sorted, strictly increasing indices) followed by an
/// optional dense auxiliary block starting at index `vocab.len()`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sparse: Vec<(u32, f64)>,
    pub aux: Vec<f64>,
    pub aux_offset: u32,
}

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.aux_offset as usize + self.aux.len()
    }

    pub fn dot(&self, row: &[f64]) -> f64 {
        let mut s = 0.0;
        for &(i, v) in &self.sparse {
            s += row[i as usize] * v;
        }
        let off = self.aux_offset as usize;
        for (k, v) in self.aux.iter().enumerate() {
            s += row[off + k] * v;
        }
        s
    }

    /// Calls `f(index, value)` for every non-zero entry of both blocks.
    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        for &(i, v) in &self.sparse {
            f(i as usize, v);
        }
        let off = self.aux_offset as usize;
        for (k, &v) in self.aux.iter().enumerate() {
            if v != 0.0 {
                f(off + k, v);
            }
        }
    }

    pub fn sparse_norm(&self) -> f64 {
        self.sparse.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> FeatureVector {
        FeatureVector {
            sparse: self.sparse.iter().map(|&(i, v)| (i, v * c)).collect(),
            aux: self.aux.iter().map(|v| v * c).collect(),
            aux_offset: self.aux_offset,
        }
    }
}

/// Space-joined n-grams of `tokens` for every n in the configured range.
pub fn ngrams(tokens: &[String], min: usize, max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in min.max(1)..=max {
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

/// Smoothed inverse document frequency: `ln((1 + N) / (1 + df)) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

impl Vocabulary {
    pub fn fit(docs: &[Vec<String>], params: VocabParams, mode: ExecMode) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::Empty("cannot fit a vocabulary on zero documents"));
        }
        if params.ngram_min == 0 || params.ngram_min > params.ngram_max {
            return Err(Error::Config(format!(
                "bad n-gram range {}..={}",
                params.ngram_min, params.ngram_max
            )));
        }
        let per_doc: Vec<HashSet<String>> = par::map(mode, docs, |d| {
            ngrams(d, params.ngram_min, params.ngram_max).into_iter().collect()
        });
        let mut df: HashMap<String, usize> = HashMap::new();
        for set in per_doc {
            for g in set {
                *df.entry(g).or_default() += 1;
            }
        }
        let mut kept: Vec<(String, usize)> =
            df.into_iter().filter(|(_, d)| *d >= params.min_df).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if let Some(max) = params.max_size {
            kept.truncate(max);
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        let n = docs.len();
        let entries = kept
            .into_iter()
            .map(|(ngram, df)| VocabEntry {
                idf: smoothed_idf(n, df),
                ngram,
                df,
            })
            .collect();
        Ok(Self::from_entries(params, entries))
    }

    fn from_entries(params: VocabParams, entries: Vec<VocabEntry>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.ngram.clone(), i as u32))
            .collect();
        Self {
            params,
            entries,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn params(&self) -> &VocabParams {
        &self.params
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn get(&self, ngram: &str) -> Option<(u32, &VocabEntry)> {
        self.index
            .get(ngram)
            .map(|&i| (i, &self.entries[i as usize]))
    }

    /// tf·idf weights of in-vocabulary n-grams, L2-normalized.
    pub fn transform(&self, tokens: &[String]) -> FeatureVector {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for g in ngrams(tokens, self.params.ngram_min, self.params.ngram_max) {
            if let Some(&i) = self.index.get(&g) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        let mut sparse: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(i, tf)| (i, tf * self.entries[i as usize].idf))
            .collect();
        let norm = sparse.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut sparse {
                *v /= norm;
            }
        }
        FeatureVector {
            sparse,
            aux: Vec::new(),
            aux_offset: self.len() as u32,
        }
    }

    pub fn transform_batch(&self, docs: &[Vec<String>], mode: ExecMode) -> Vec<FeatureVector> {
        par::map(mode, docs, |d| self.transform(d))
    }

    /// Writes `ngram<TAB>index<TAB>df<TAB>idf` lines in index order.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}\t{:?}", e.ngram, i, e.df, e.idf)?;
        }
        w.flush()
    }

    pub fn read<R: BufRead>(r: R, params: VocabParams) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::ModelFormat(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::ModelFormat(format!("vocabulary line {}: {what}", lineno + 1));
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let idx: usize = f[1].parse().map_err(|_| bad("bad index"))?;
            if idx != entries.len() {
                return Err(bad("indices must be dense and in order"));
            }
            entries.push(VocabEntry {
                ngram: f[0].to_string(),
                df: f[2].parse().map_err(|_| bad("bad df"))?,
                idf: f[3].parse().map_err(|_| bad("bad idf"))?,
            });
        }
        Ok(Self::from_entries(params, entries))
    }
}

/// `[profane-token count, summed profanity score, <censored> count]`.
pub fn profanity_features(tokens: &[Token], lexicons: &LexiconSet) -> [f64; AUX_DIM] {
    let mut out = [0.0; AUX_DIM];
    for t in tokens {
        if t.kind == TokenKind::Annotation && t.surface == CENSORED {
            out[2] += 1.0;
        } else if let Some(s) = lexicons.profanity_score(&t.surface) {
            out[0] += 1.0;
            out[1] += s;
        }
    }
    out
}

/// TF-IDF vector with the profanity block attached.
pub fn featurize(vocab: &Vocabulary, tokens: &[Token], lexicons: &LexiconSet, with_aux: bool) -> FeatureVector {
    let surfaces: Vec<String> = tokens.iter().map(|t| t.surface.clone()).collect();
    let mut fv = vocab.transform(&surfaces);
    if with_aux {
        fv.aux = profanity_features(tokens, lexicons).to_vec();
    }
    fv
}
