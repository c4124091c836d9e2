//! Source ingestion, collation into the unified corpus, the unified TSV
//! format, per-language statistics, stratified splitting and the rule-based
//! weak labeler.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::textnorm::{self, TokenKind};
use crate::{par, Error, ExecMode, Label, Language, LexiconSet, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    #[default]
    Csv,
    Tsv,
}

/// One source dataset and how to map it into the unified schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDescriptor {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub format: SourceFormat,
    pub text_column: String,
    pub label_column: String,
    pub language: Language,
    /// Original label string to unified label.
    pub labels: BTreeMap<String, Label>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourcesFile {
    #[serde(rename = "source", default)]
    sources: Vec<SourceDescriptor>,
}

/// Reads source descriptors from a TOML file with one `[[source]]` table per
/// dataset. Relative paths resolve against the config file's directory.
pub fn load_sources(config: impl AsRef<Path>) -> Result<Vec<SourceDescriptor>> {
    let config = config.as_ref();
    let text = fs::read_to_string(config).map_err(|e| Error::io(config, e))?;
    let file: SourcesFile =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
    let base = config.parent().unwrap_or(Path::new("."));
    Ok(file
        .sources
        .into_iter()
        .map(|mut s| {
            if s.path.is_relative() {
                s.path = base.join(&s.path);
            }
            s
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnifiedRecord {
    pub id: u64,
    pub text: String,
    pub label: Label,
    pub language: Language,
    pub source_id: String,
}

/// Reads every row of one source. Ids are row indices; [`collate`] renumbers.
pub fn ingest_source(desc: &SourceDescriptor) -> Result<Vec<UnifiedRecord>> {
    let path = &desc.path;
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(match desc.format {
            SourceFormat::Csv => b',',
            SourceFormat::Tsv => b'\t',
        })
        .quoting(desc.format == SourceFormat::Csv)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.clone(),
                column: name.to_string(),
            })
    };
    let text_idx = column(&desc.text_column)?;
    let label_idx = column(&desc.label_column)?;

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let malformed = |reason: &str| Error::MalformedRow {
            path: path.clone(),
            line,
            reason: reason.to_string(),
        };
        let text = row.get(text_idx).ok_or_else(|| malformed("missing text field"))?;
        let raw_label = row.get(label_idx).ok_or_else(|| malformed("missing label field"))?;
        if text.trim().is_empty() {
            return Err(malformed("empty text"));
        }
        let label = *desc
            .labels
            .get(raw_label.trim())
            .ok_or_else(|| Error::UnmappedLabel {
                path: path.clone(),
                line,
                label: raw_label.to_string(),
                source_id: desc.id.clone(),
            })?;
        out.push(UnifiedRecord {
            id: out.len() as u64,
            text: text.to_string(),
            label,
            language: desc.language,
            source_id: desc.id.clone(),
        });
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::MalformedRow {
            path: path.to_path_buf(),
            line,
            reason: format!("{other:?}"),
        },
    }
}

/// Concatenates sources in order and assigns dense ids `0..N`. With `dedup`,
/// later exact-text duplicates are dropped.
pub fn collate(sources: &[SourceDescriptor], dedup: bool) -> Result<Vec<UnifiedRecord>> {
    let mut ids = HashSet::new();
    for s in sources {
        if !ids.insert(s.id.as_str()) {
            return Err(Error::DuplicateSource(s.id.clone()));
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in sources {
        for mut r in ingest_source(s)? {
            if dedup && !seen.insert(r.text.clone()) {
                continue;
            }
            r.id = out.len() as u64;
            out.push(r);
        }
    }
    Ok(out)
}

pub const TSV_HEADER: &str = "id\ttext\tlabel\tlanguage\tsource_id";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(format!("bad escape \\{}", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

pub fn write_tsv<W: Write>(mut w: W, records: &[UnifiedRecord]) -> std::io::Result<()> {
    writeln!(w, "{TSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            r.id,
            escape(&r.text),
            r.label,
            r.language,
            escape(&r.source_id)
        )?;
    }
    w.flush()
}

pub fn save_corpus(path: impl AsRef<Path>, records: &[UnifiedRecord]) -> Result<()> {
    let path = path.as_ref();
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_tsv(BufWriter::new(f), records).map_err(|e| Error::io(path, e))
}

pub fn read_tsv<R: BufRead>(r: R, path: &Path) -> Result<Vec<UnifiedRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        let malformed = |reason: String| Error::MalformedRow {
            path: path.to_path_buf(),
            line: lineno,
            reason,
        };
        if i == 0 {
            if line != TSV_HEADER {
                return Err(malformed(format!("expected header {TSV_HEADER:?}")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(malformed(format!("expected 5 fields, got {}", f.len())));
        }
        out.push(UnifiedRecord {
            id: f[0].parse().map_err(|_| malformed(format!("bad id {:?}", f[0])))?,
            text: unescape(f[1]).map_err(malformed)?,
            label: f[2].parse().map_err(|e: Error| malformed(e.to_string()))?,
            language: f[3].parse().map_err(|e: Error| malformed(e.to_string()))?,
            source_id: unescape(f[4]).map_err(malformed)?,
        });
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<UnifiedRecord>> {
    let path = path.as_ref();
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_tsv(BufReader::new(f), path)
}

/// Checks the record-level invariants of a corpus: dense ids and non-empty text.
pub fn validate(records: &[UnifiedRecord]) -> Result<()> {
    for (i, r) in records.iter().enumerate() {
        if r.id != i as u64 {
            return Err(Error::Config(format!("record {i} has id {}", r.id)));
        }
        if r.text.trim().is_empty() {
            return Err(Error::Config(format!("record {i} has empty text")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub records: usize,
    pub hate: usize,
    pub abusive: usize,
    pub vocab_size: usize,
    pub total_tokens: usize,
    pub max_seq_len: usize,
}

impl LanguageStats {
    pub fn hate_fraction(&self) -> f64 {
        frac(self.hate, self.records)
    }

    pub fn abuse_fraction(&self) -> f64 {
        frac(self.abusive, self.records)
    }
}

fn frac(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_language: BTreeMap<Language, LanguageStats>,
}

impl CorpusStats {
    pub fn get(&self, lang: Language) -> LanguageStats {
        self.per_language.get(&lang).copied().unwrap_or_default()
    }

    /// Table-shaped summary: records, vocabulary, max length, hate % and abuse %.
    pub fn render(&self) -> String {
        let mut s = String::from("language    records  vocab  max_len  hate%   abuse%\n");
        for lang in Language::ALL {
            let st = self.get(lang);
            s.push_str(&format!(
                "{:<11} {:>7}  {:>5}  {:>7}  {:>6.2}  {:>6.2}\n",
                lang.as_str(),
                st.records,
                st.vocab_size,
                st.max_seq_len,
                100.0 * st.hate_fraction(),
                100.0 * st.abuse_fraction()
            ));
        }
        s
    }
}

/// Per-language counts over tokenized texts. Languages without records get a
/// zeroed entry.
pub fn compute_stats<F>(records: &[UnifiedRecord], tokenizer: F, mode: ExecMode) -> CorpusStats
where
    F: Fn(&str, Language) -> Vec<String> + Sync + Send,
{
    let tokenized = par::map(mode, records, |r| tokenizer(&r.text, r.language));
    let mut vocab: HashMap<Language, HashSet<&str>> = HashMap::new();
    let mut per_language: BTreeMap<Language, LanguageStats> =
        Language::ALL.iter().map(|&l| (l, LanguageStats::default())).collect();
    for (r, toks) in records.iter().zip(&tokenized) {
        let st = per_language.entry(r.language).or_default();
        st.records += 1;
        match r.label {
            Label::Hate => st.hate += 1,
            Label::Abusive => st.abusive += 1,
            Label::Neither => {}
        }
        st.total_tokens += toks.len();
        st.max_seq_len = st.max_seq_len.max(toks.len());
        vocab
            .entry(r.language)
            .or_default()
            .extend(toks.iter().map(String::as_str));
    }
    for (lang, v) in vocab {
        per_language.entry(lang).or_default().vocab_size = v.len();
    }
    CorpusStats { per_language }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Stratified split over (label, language). Each stratum sends
/// `round(n * fraction)` records to train; single-record strata go to train.
/// Both halves keep corpus order.
pub fn split(records: &[UnifiedRecord], spec: &SplitSpec) -> (Vec<UnifiedRecord>, Vec<UnifiedRecord>) {
    let mut strata: BTreeMap<(Language, Label), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata.entry((r.language, r.label)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut in_train = vec![false; records.len()];
    for idx in strata.values_mut() {
        idx.shuffle(&mut rng);
        let n_train = if idx.len() == 1 {
            1
        } else {
            ((idx.len() as f64) * spec.train_fraction).round() as usize
        };
        for &i in &idx[..n_train.min(idx.len())] {
            in_train[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (r, t) in records.iter().zip(in_train) {
        if t {
            train.push(r.clone())
        } else {
            test.push(r.clone())
        }
    }
    (train, test)
}

/// Rule-based labeler for synthetic data and annotation aid. Rules fire in
/// priority order: slur, stereotype phrase, problematic hashtag (all hate),
/// then abusive vocabulary, else neither.
pub fn weak_label(text: &str, lexicons: &LexiconSet) -> Result<Label> {
    if lexicons.slurs.is_empty() {
        return Err(Error::LexiconMissing("slurs"));
    }
    if lexicons.profane_forms.is_empty() {
        return Err(Error::LexiconMissing("abusive words"));
    }
    let words: Vec<String> = textnorm::tokenize(text, Language::En)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word && t.surface.chars().any(char::is_alphanumeric))
        .map(|t| t.surface)
        .collect();

    if words.iter().any(|w| lexicons.slurs.contains_key(w)) {
        return Ok(Label::Hate);
    }
    let has_phrase = lexicons.stereotypes.iter().any(|(phrase, _)| {
        !phrase.is_empty() && words.windows(phrase.len()).any(|w| w == phrase.as_slice())
    });
    if has_phrase {
        return Ok(Label::Hate);
    }
    let has_tag = text.split_whitespace().any(|t| {
        let t = t
            .trim_end_matches(|c: char| !(c.is_alphanumeric() || textnorm_mark(c)))
            .to_lowercase();
        lexicons.hashtags.contains_key(&t)
    });
    if has_tag {
        return Ok(Label::Hate);
    }
    if words.iter().any(|w| lexicons.profane_forms.contains_key(w)) {
        return Ok(Label::Abusive);
    }
    Ok(Label::Neither)
}

fn textnorm_mark(c: char) -> bool {
    ('\u{0900}'..='\u{0963}').contains(&c) || ('\u{0966}'..='\u{097F}').contains(&c)
}
