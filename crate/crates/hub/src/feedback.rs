//! Append-only feedback log.
//!
//! One JSON object per line. A `record` line stores a scored comment; a
//! `verdict` line amends the verdict of an earlier record. Appends go
//! through one mutex-guarded writer and are synced before returning.
//!
//! ```text
//! {"kind":"record","id":1,"text":"...","language":"en","predicted":"neither",
//!  "probs":[0.3,0.3,0.4],"confidence":0.4,"verdict":{"status":"unreviewed"},
//!  "timestamp_ms":1700000000000,"model_version":1}
//! {"kind":"verdict","id":1,"verdict":{"status":"relabeled","label":"hate"},"timestamp_ms":1700000000500}
//! ```
//!
//! A torn final line (no trailing newline) is dropped on open; any other
//! unparsable line is a hard error.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hatewatch_core::{Label, Language};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::classifier::Prediction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Unreviewed,
    Confirmed,
    Relabeled { label: Label },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub id: u64,
    pub text: String,
    pub language: Language,
    pub predicted: Label,
    pub probs: [f64; 3],
    pub confidence: f64,
    pub verdict: Verdict,
    pub timestamp_ms: u64,
    pub model_version: u64,
}

impl FeedbackRecord {
    /// The label this record contributes to retraining, if resolved.
    pub fn training_label(&self) -> Option<Label> {
        match self.verdict {
            Verdict::Unreviewed => None,
            Verdict::Confirmed => Some(self.predicted),
            Verdict::Relabeled { label } => Some(label),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Entry {
    Record(FeedbackRecord),
    Verdict {
        id: u64,
        verdict: Verdict,
        timestamp_ms: u64,
    },
}

struct State {
    file: File,
    records: Vec<FeedbackRecord>,
    by_id: HashMap<u64, usize>,
    next_id: u64,
    last_ts: u64,
    lines: usize,
}

impl State {
    fn append(&mut self, path: &Path, entry: &Entry, durable: bool) -> Result<()> {
        let mut line = serde_json::to_string(entry).map_err(|e| Error::io(path, e.into()))?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .map_err(|e| Error::io(path, e))?;
        if durable {
            self.file.sync_data().map_err(|e| Error::io(path, e))?;
        }
        self.lines += 1;
        Ok(())
    }

    fn tick(&mut self) -> u64 {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        self.last_ts = self.last_ts.max(now);
        self.last_ts
    }

    fn apply(&mut self, entry: Entry) -> std::result::Result<(), String> {
        match entry {
            Entry::Record(r) => {
                if self.by_id.contains_key(&r.id) {
                    return Err(format!("duplicate id {}", r.id));
                }
                self.next_id = self.next_id.max(r.id + 1);
                self.last_ts = self.last_ts.max(r.timestamp_ms);
                self.by_id.insert(r.id, self.records.len());
                self.records.push(r);
            }
            Entry::Verdict { id, verdict, timestamp_ms } => {
                let i = *self.by_id.get(&id).ok_or_else(|| format!("verdict for unknown id {id}"))?;
                self.last_ts = self.last_ts.max(timestamp_ms);
                self.records[i].verdict = verdict;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompactStats {
    pub lines_before: usize,
    pub lines_after: usize,
}

pub struct FeedbackStore {
    path: PathBuf,
    threshold: f64,
    durable: bool,
    state: Mutex<State>,
}

impl std::fmt::Debug for FeedbackStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeedbackStore")
            .field("path", &self.path)
            .field("threshold", &self.threshold)
            .finish_non_exhaustive()
    }
}

impl FeedbackStore {
    /// Opens (or creates) the log at `path` and replays it. Records with
    /// confidence below `threshold` form the review queue.
    pub fn open(path: impl Into<PathBuf>, threshold: f64) -> Result<Self> {
        let path = path.into();
        check_threshold(threshold)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let text = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let complete = text.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        if complete < text.len() {
            tracing::warn!(path = %path.display(), bytes = text.len() - complete, "dropping torn tail of feedback log");
            file.set_len(complete as u64).map_err(|e| Error::io(&path, e))?;
            file.sync_all().map_err(|e| Error::io(&path, e))?;
        }
        let mut state = State {
            file,
            records: Vec::new(),
            by_id: HashMap::new(),
            next_id: 1,
            last_ts: 0,
            lines: 0,
        };
        let body = std::str::from_utf8(&text[..complete]).map_err(|e| Error::CorruptLog {
            path: path.clone(),
            line: 0,
            reason: e.to_string(),
        })?;
        for (n, line) in body.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |reason: String| Error::CorruptLog {
                path: path.clone(),
                line: n + 1,
                reason,
            };
            let entry: Entry = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
            state.apply(entry).map_err(corrupt)?;
            state.lines += 1;
        }
        Ok(Self {
            path,
            threshold,
            durable: true,
            state: Mutex::new(state),
        })
    }

    /// Skips the per-append sync. Only for throwaway stores.
    pub fn set_durable(&mut self, durable: bool) {
        self.durable = durable;
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_queued(&self, record: &FeedbackRecord) -> bool {
        record.verdict == Verdict::Unreviewed && record.confidence < self.threshold
    }

    /// Appends a scored comment and returns the stored record.
    pub fn record(
        &self,
        text: &str,
        language: Language,
        prediction: &Prediction,
        model_version: u64,
    ) -> Result<FeedbackRecord> {
        if !prediction.probs.iter().all(|p| p.is_finite() && *p >= 0.0) {
            return Err(Error::Policy(format!("invalid probability triple {:?}", prediction.probs)));
        }
        let mut st = self.state.lock();
        let record = FeedbackRecord {
            id: st.next_id,
            text: text.to_string(),
            language,
            predicted: prediction.label,
            probs: prediction.probs,
            confidence: prediction.confidence(),
            verdict: Verdict::Unreviewed,
            timestamp_ms: st.tick(),
            model_version,
        };
        let entry = Entry::Record(record);
        st.append(&self.path, &entry, self.durable)?;
        let Entry::Record(record) = entry else { unreachable!() };
        st.next_id += 1;
        let at = st.records.len();
        st.by_id.insert(record.id, at);
        st.records.push(record.clone());
        Ok(record)
    }

    pub fn get(&self, id: u64) -> Option<FeedbackRecord> {
        let st = self.state.lock();
        st.by_id.get(&id).map(|&i| st.records[i].clone())
    }

    pub fn len(&self) -> usize {
        self.state.lock().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every record in append order.
    pub fn records(&self) -> Vec<FeedbackRecord> {
        self.state.lock().records.clone()
    }

    /// Unreviewed records below the confidence threshold, oldest first.
    pub fn review_queue(&self, language: Option<Language>, limit: usize) -> Vec<FeedbackRecord> {
        let st = self.state.lock();
        st.records
            .iter()
            .filter(|r| self.is_queued(r) && language.is_none_or(|l| r.language == l))
            .take(limit)
            .cloned()
            .collect()
    }

    /// Stores a confirm or relabel verdict on an unreviewed record.
    pub fn resolve(&self, id: u64, verdict: Verdict) -> Result<FeedbackRecord> {
        if verdict == Verdict::Unreviewed {
            return Err(Error::EmptyVerdict);
        }
        let mut st = self.state.lock();
        let i = *st.by_id.get(&id).ok_or(Error::UnknownId(id))?;
        if st.records[i].verdict != Verdict::Unreviewed {
            return Err(Error::AlreadyResolved(id));
        }
        let timestamp_ms = st.tick();
        st.append(&self.path, &Entry::Verdict { id, verdict, timestamp_ms }, self.durable)?;
        st.records[i].verdict = verdict;
        Ok(st.records[i].clone())
    }

    /// Resolved `(text, training label)` pairs for `language`, in log order.
    pub fn training_pool(&self, language: Language) -> Vec<(String, Label)> {
        let st = self.state.lock();
        st.records
            .iter()
            .filter(|r| r.language == language)
            .filter_map(|r| r.training_label().map(|l| (r.text.clone(), l)))
            .collect()
    }

    /// Rewrites the log with verdicts folded into their records. The new
    /// log is written beside the old one, synced, then renamed over it.
    pub fn compact(&self) -> Result<CompactStats> {
        let mut st = self.state.lock();
        let tmp = self.path.with_extension("compact.tmp");
        {
            let f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
            let mut w = BufWriter::new(f);
            for r in &st.records {
                serde_json::to_writer(&mut w, &Entry::Record(r.clone())).map_err(|e| Error::io(&tmp, e.into()))?;
                w.write_all(b"\n").map_err(|e| Error::io(&tmp, e))?;
            }
            w.flush().map_err(|e| Error::io(&tmp, e))?;
            w.get_ref().sync_all().map_err(|e| Error::io(&tmp, e))?;
        }
        fs::rename(&tmp, &self.path).map_err(|e| Error::io(&self.path, e))?;
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            if let Ok(d) = File::open(dir) {
                let _ = d.sync_all();
            }
        }
        st.file = OpenOptions::new()
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        let stats = CompactStats {
            lines_before: st.lines,
            lines_after: st.records.len(),
        };
        st.lines = st.records.len();
        Ok(stats)
    }
}

pub(crate) fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 1.0 / 3.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::Policy(format!("confidence threshold {threshold} outside (1/3, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(p: [f64; 3]) -> Prediction {
        Prediction::from_probs(p)
    }

    fn store() -> (tempfile::TempDir, FeedbackStore) {
        let dir = tempfile::tempdir().unwrap();
        let s = FeedbackStore::open(dir.path().join("feedback.jsonl"), 0.60).unwrap();
        (dir, s)
    }

    #[test]
    fn low_confidence_is_queued() {
        let (_d, s) = store();
        let a = s.record("a", Language::En, &pred([0.34, 0.33, 0.33]), 1).unwrap();
        let b = s.record("b", Language::En, &pred([0.95, 0.03, 0.02]), 1).unwrap();
        assert_ne!(a.id, b.id);
        let q = s.review_queue(None, 10);
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].id, a.id);
    }

    #[test]
    fn empty_store_has_empty_queue() {
        let (_d, s) = store();
        assert!(s.review_queue(None, 10).is_empty());
    }

    #[test]
    fn resolved_records_leave_the_queue() {
        let (_d, s) = store();
        let ids: Vec<u64> = (0..4)
            .map(|i| s.record(&format!("t{i}"), Language::En, &pred([0.4, 0.3, 0.3]), 1).unwrap().id)
            .collect();
        s.resolve(ids[1], Verdict::Confirmed).unwrap();
        let q: Vec<u64> = s.review_queue(None, 10).iter().map(|r| r.id).collect();
        assert_eq!(q, vec![ids[0], ids[2], ids[3]]);
    }

    #[test]
    fn limit_takes_the_oldest() {
        let (_d, s) = store();
        for i in 0..5 {
            s.record(&format!("t{i}"), Language::En, &pred([0.4, 0.3, 0.3]), 1).unwrap();
        }
        let q = s.review_queue(None, 2);
        assert_eq!(q.iter().map(|r| r.text.as_str()).collect::<Vec<_>>(), ["t0", "t1"]);
        assert!(q[0].timestamp_ms <= q[1].timestamp_ms);
    }

    #[test]
    fn language_filter() {
        let (_d, s) = store();
        s.record("x", Language::En, &pred([0.4, 0.3, 0.3]), 1).unwrap();
        s.record("y", Language::Hi, &pred([0.4, 0.3, 0.3]), 1).unwrap();
        let q = s.review_queue(Some(Language::Hi), 10);
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].text, "y");
    }

    #[test]
    fn resolve_errors() {
        let (_d, s) = store();
        let r = s.record("x", Language::En, &pred([0.4, 0.3, 0.3]), 1).unwrap();
        assert!(matches!(s.resolve(99, Verdict::Confirmed), Err(Error::UnknownId(99))));
        assert!(matches!(s.resolve(r.id, Verdict::Unreviewed), Err(Error::EmptyVerdict)));
        s.resolve(r.id, Verdict::Relabeled { label: Label::Hate }).unwrap();
        assert!(matches!(
            s.resolve(r.id, Verdict::Confirmed),
            Err(Error::AlreadyResolved(_))
        ));
    }

    #[test]
    fn pool_uses_verdict_labels() {
        let (_d, s) = store();
        let a = s.record("a", Language::En, &pred([0.2, 0.3, 0.5]), 1).unwrap();
        let b = s.record("b", Language::En, &pred([0.2, 0.3, 0.5]), 1).unwrap();
        assert!(s.training_pool(Language::En).is_empty());
        s.resolve(a.id, Verdict::Confirmed).unwrap();
        s.resolve(b.id, Verdict::Relabeled { label: Label::Hate }).unwrap();
        assert_eq!(
            s.training_pool(Language::En),
            vec![("a".to_string(), Label::Neither), ("b".to_string(), Label::Hate)]
        );
    }

    #[test]
    fn invalid_threshold_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for t in [0.2, 1.0 / 3.0, 1.5] {
            assert!(FeedbackStore::open(dir.path().join("f"), t).is_err());
        }
    }
}
