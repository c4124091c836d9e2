use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use hatewatch_core::corpus::load_corpus;
use hatewatch_core::langid::{self, RoutingDecision, RoutingThresholds};
use hatewatch_core::{Label, Language, LexiconSet};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::classifier::{train_classifier, Prediction, TrainOptions};
use crate::feedback::{check_threshold, FeedbackRecord, FeedbackStore, Verdict};
use crate::registry::{ModelHandle, ModelRegistry};
use crate::{Error, Result};

/// Longest accepted comment, in characters.
pub const MAX_TEXT_CHARS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrainPolicy {
    /// Records whose top probability is below this go to the review queue.
    pub threshold: f64,
    /// Resolved samples required before a retrain may run.
    pub min_pool: usize,
    /// Retrain aborts when one class exceeds this share of the training set.
    pub max_class_share: f64,
    /// Unified-format corpus the pool is added to.
    pub base_corpus: Option<PathBuf>,
    pub train: TrainOptions,
}

impl Default for RetrainPolicy {
    fn default() -> Self {
        Self {
            threshold: 0.60,
            min_pool: 50,
            max_class_share: 0.90,
            base_corpus: None,
            train: TrainOptions::default(),
        }
    }
}

impl RetrainPolicy {
    pub fn validate(&self) -> Result<()> {
        check_threshold(self.threshold)?;
        if self.min_pool < 1 {
            return Err(Error::Policy("min_pool must be at least 1".into()));
        }
        if !(self.max_class_share > 0.0 && self.max_class_share <= 1.0) {
            return Err(Error::Policy(format!("max_class_share {} outside (0, 1]", self.max_class_share)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HubSettings {
    pub registry_dir: PathBuf,
    pub feedback_log: PathBuf,
    pub policy: RetrainPolicy,
    pub routing: RoutingThresholds,
    pub lexicons: Arc<LexiconSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scored {
    /// Feedback id when the result was captured.
    pub record_id: Option<u64>,
    pub language: Language,
    pub version: u64,
    pub prediction: Prediction,
    /// Present when the language was detected rather than given.
    pub routing: Option<RoutingDecision>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainOutcome {
    pub language: Language,
    pub previous_version: Option<u64>,
    pub version: u64,
    pub base_size: usize,
    pub pool_size: usize,
    pub class_counts: [usize; 3],
}

pub struct Hub {
    registry: ModelRegistry,
    feedback: FeedbackStore,
    lexicons: Arc<LexiconSet>,
    policy: RetrainPolicy,
    routing: RoutingThresholds,
    base: BTreeMap<Language, Vec<(String, Label)>>,
    retrain_locks: BTreeMap<Language, Mutex<()>>,
}

impl std::fmt::Debug for Hub {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hub")
            .field("registry", &self.registry.root())
            .field("feedback", &self.feedback)
            .field("policy", &self.policy)
            .finish_non_exhaustive()
    }
}

impl Hub {
    pub fn open(settings: HubSettings) -> Result<Self> {
        settings.policy.validate()?;
        let registry = ModelRegistry::open(&settings.registry_dir)?;
        let feedback = FeedbackStore::open(&settings.feedback_log, settings.policy.threshold)?;
        let mut base: BTreeMap<Language, Vec<(String, Label)>> = BTreeMap::new();
        if let Some(path) = &settings.policy.base_corpus {
            for r in load_corpus(path)? {
                base.entry(r.language).or_default().push((r.text, r.label));
            }
        }
        Ok(Self {
            registry,
            feedback,
            lexicons: settings.lexicons,
            policy: settings.policy,
            routing: settings.routing,
            base,
            retrain_locks: Language::ALL.iter().map(|&l| (l, Mutex::new(()))).collect(),
        })
    }

    pub fn registry(&self) -> &ModelRegistry {
        &self.registry
    }

    pub fn feedback(&self) -> &FeedbackStore {
        &self.feedback
    }

    pub fn feedback_mut(&mut self) -> &mut FeedbackStore {
        &mut self.feedback
    }

    pub fn lexicons(&self) -> &LexiconSet {
        &self.lexicons
    }

    pub fn policy(&self) -> &RetrainPolicy {
        &self.policy
    }

    pub fn base_size(&self, language: Language) -> usize {
        self.base.get(&language).map_or(0, Vec::len)
    }

    /// Resolves the language (given or detected) and the serving model.
    pub fn route(&self, text: &str, language: Option<Language>) -> Result<(Arc<ModelHandle>, Option<RoutingDecision>)> {
        check_text(text)?;
        let (language, routing) = match language {
            Some(l) => (l, None),
            None => {
                let d = langid::detect(text, &self.lexicons, &self.routing)?;
                (d.language, Some(d))
            }
        };
        let handle = self.registry.current(language).ok_or(Error::NoModel(language))?;
        Ok((handle, routing))
    }

    /// Scores one comment and, when `capture` is set, appends it to the
    /// feedback log.
    pub fn score(&self, text: &str, language: Option<Language>, capture: bool) -> Result<Scored> {
        let (handle, routing) = self.route(text, language)?;
        let prediction = handle.classifier.score(text, &self.lexicons)?;
        let record_id = if capture {
            Some(self.feedback.record(text, handle.language, &prediction, handle.version)?.id)
        } else {
            None
        };
        Ok(Scored {
            record_id,
            language: handle.language,
            version: handle.version,
            prediction,
            routing,
        })
    }

    pub fn review_queue(&self, language: Option<Language>, limit: usize) -> Vec<FeedbackRecord> {
        self.feedback.review_queue(language, limit)
    }

    pub fn resolve(&self, id: u64, verdict: Verdict) -> Result<FeedbackRecord> {
        self.feedback.resolve(id, verdict)
    }

    pub fn is_retraining(&self, language: Language) -> bool {
        self.retrain_locks[&language].is_locked()
    }

    /// Trains on the base corpus plus the resolved pool and installs the
    /// result as the next version. Only one retrain per language runs at a
    /// time; a second caller gets [`Error::Busy`].
    pub fn retrain(&self, language: Language) -> Result<RetrainOutcome> {
        let _guard = self.retrain_locks[&language]
            .try_lock()
            .ok_or(Error::Busy(language))?;
        let pool = self.feedback.training_pool(language);
        if pool.len() < self.policy.min_pool {
            return Err(Error::PoolTooSmall {
                language,
                have: pool.len(),
                need: self.policy.min_pool,
            });
        }
        let base = self.base.get(&language).map_or(&[][..], Vec::as_slice);
        let mut data = Vec::with_capacity(base.len() + pool.len());
        data.extend_from_slice(base);
        data.extend(pool.iter().cloned());
        let class_counts = bias_guard(&data, self.policy.max_class_share)?;
        let previous_version = self.registry.version(language);
        let classifier = train_classifier(language, &data, &self.lexicons, &self.policy.train)?;
        let version = self.registry.install(classifier)?;
        Ok(RetrainOutcome {
            language,
            previous_version,
            version,
            base_size: base.len(),
            pool_size: pool.len(),
            class_counts,
        })
    }

    /// Trains and installs version 1 from the base corpus when `language`
    /// has no model yet. Returns the installed version, if any.
    pub fn bootstrap(&self, language: Language) -> Result<Option<u64>> {
        let _guard = self.retrain_locks[&language]
            .try_lock()
            .ok_or(Error::Busy(language))?;
        if self.registry.current(language).is_some() {
            return Ok(None);
        }
        let Some(base) = self.base.get(&language).filter(|b| !b.is_empty()) else {
            return Ok(None);
        };
        let classifier = train_classifier(language, base, &self.lexicons, &self.policy.train)?;
        Ok(Some(self.registry.install(classifier)?))
    }
}

pub fn check_text(text: &str) -> Result<()> {
    if text.trim().is_empty() {
        return Err(Error::EmptyText);
    }
    let chars = text.chars().count();
    if chars > MAX_TEXT_CHARS {
        return Err(Error::Oversize {
            chars,
            limit: MAX_TEXT_CHARS,
        });
    }
    Ok(())
}

/// Per-class counts of `data`, or an error when one class exceeds `limit`.
pub fn bias_guard(data: &[(String, Label)], limit: f64) -> Result<[usize; 3]> {
    let mut counts = [0usize; 3];
    for (_, l) in data {
        counts[l.index()] += 1;
    }
    let total = data.len().max(1) as f64;
    for label in Label::ALL {
        let share = counts[label.index()] as f64 / total;
        if share > limit {
            tracing::warn!(%label, share, limit, "class bias guard tripped");
            return Err(Error::BiasGuard { label, share, limit });
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_limits() {
        assert!(matches!(check_text("  "), Err(Error::EmptyText)));
        assert!(check_text(&"a".repeat(MAX_TEXT_CHARS)).is_ok());
        assert!(matches!(
            check_text(&"क".repeat(MAX_TEXT_CHARS + 1)),
            Err(Error::Oversize { .. })
        ));
    }

    #[test]
    fn guard_trips_above_limit() {
        let mk = |h: usize, n: usize| -> Vec<(String, Label)> {
            (0..h)
                .map(|_| (String::new(), Label::Hate))
                .chain((0..n).map(|_| (String::new(), Label::Neither)))
                .collect()
        };
        assert_eq!(bias_guard(&mk(9, 1), 0.9).unwrap(), [9, 0, 1]);
        assert!(matches!(
            bias_guard(&mk(10, 1), 0.9),
            Err(Error::BiasGuard { label: Label::Hate, .. })
        ));
    }

    #[test]
    fn policy_bounds() {
        assert!(RetrainPolicy::default().validate().is_ok());
        let bad = RetrainPolicy {
            min_pool: 0,
            ..RetrainPolicy::default()
        };
        assert!(bad.validate().is_err());
        let bad = RetrainPolicy {
            threshold: 0.3,
            ..RetrainPolicy::default()
        };
        assert!(bad.validate().is_err());
    }
}
