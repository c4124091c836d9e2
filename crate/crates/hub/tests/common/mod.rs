#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use hatewatch_core::corpus::save_corpus;
use hatewatch_core::langid::RoutingThresholds;
use hatewatch_core::synth::{generate_synthetic_corpus, SynthSpec};
use hatewatch_core::{Language, LexiconSet};
use hatewatch_hub::{Hub, HubSettings, RetrainPolicy};

/// Borderline between hate and neither under the synthetic base corpus.
pub const PROBE: &str = "immigrants and the budget";

pub fn base_corpus(dir: &Path, per_language: usize) -> std::path::PathBuf {
    let lx = LexiconSet::bundled();
    let spec = SynthSpec::new(
        &[(Language::En, per_language), (Language::Hi, per_language)],
        [0.4, 0.2, 0.4],
        7,
    );
    let records = generate_synthetic_corpus(&spec, &lx).unwrap();
    let path = dir.join("base.tsv");
    save_corpus(&path, &records).unwrap();
    path
}

pub fn settings(dir: &Path, policy: RetrainPolicy) -> HubSettings {
    HubSettings {
        registry_dir: dir.join("registry"),
        feedback_log: dir.join("feedback.jsonl"),
        policy,
        routing: RoutingThresholds::default(),
        lexicons: Arc::new(LexiconSet::bundled()),
    }
}

/// A hub with a bootstrapped English and Hindi model over a synthetic base.
pub fn hub(dir: &Path, per_language: usize) -> Hub {
    let policy = RetrainPolicy {
        base_corpus: Some(base_corpus(dir, per_language)),
        ..RetrainPolicy::default()
    };
    let hub = Hub::open(settings(dir, policy)).unwrap();
    assert_eq!(hub.bootstrap(Language::En).unwrap(), Some(1));
    assert_eq!(hub.bootstrap(Language::Hi).unwrap(), Some(1));
    hub
}
