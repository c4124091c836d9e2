mod common;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;

use common::PROBE;
use hatewatch_core::corpus::load_corpus;
use hatewatch_core::{Label, Language};
use hatewatch_hub::{train_classifier, Error, Hub, RetrainPolicy, Verdict};

fn inject(hub: &Hub, n: usize, label: Label) {
    for _ in 0..n {
        let s = hub.score(PROBE, None, true).unwrap();
        hub.resolve(s.record_id.unwrap(), Verdict::Relabeled { label }).unwrap();
    }
}

#[test]
fn probe_starts_low_confidence_and_queued() {
    let dir = tempfile::tempdir().unwrap();
    let hub = common::hub(dir.path(), 300);
    let s = hub.score(PROBE, None, true).unwrap();
    assert_eq!(s.language, Language::En);
    assert!(s.prediction.confidence() < 0.60, "{:?}", s.prediction);
    assert_eq!(hub.review_queue(Some(Language::En), 10)[0].id, s.record_id.unwrap());
}

#[test]
fn small_pool_is_rejected_and_version_kept() {
    let dir = tempfile::tempdir().unwrap();
    let hub = common::hub(dir.path(), 300);
    inject(&hub, 49, Label::Hate);
    assert!(matches!(
        hub.retrain(Language::En),
        Err(Error::PoolTooSmall { have: 49, need: 50, .. })
    ));
    assert_eq!(hub.registry().version(Language::En), Some(1));
}

#[test]
fn relabeled_copies_flip_the_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let hub = Arc::new(common::hub(dir.path(), 300));
    assert_ne!(hub.score(PROBE, None, false).unwrap().prediction.label, Label::Hate);
    inject(&hub, 100, Label::Hate);

    // Oracle: the trainer alone, on base plus pool, already flips the sentence.
    let mut data: Vec<(String, Label)> = load_corpus(dir.path().join("base.tsv"))
        .unwrap()
        .into_iter()
        .filter(|r| r.language == Language::En)
        .map(|r| (r.text, r.label))
        .collect();
    data.extend(hub.feedback().training_pool(Language::En));
    let oracle = train_classifier(Language::En, &data, hub.lexicons(), &hub.policy().train).unwrap();
    let expected = oracle.score(PROBE, hub.lexicons()).unwrap();
    assert_eq!(expected.label, Label::Hate);

    let done = Arc::new(AtomicBool::new(false));
    let stream = {
        let (hub, done) = (hub.clone(), done.clone());
        thread::spawn(move || {
            let mut versions = Vec::new();
            while !done.load(Ordering::Acquire) {
                let s = hub.score("have a nice day", Some(Language::En), false).unwrap();
                versions.push(s.version);
            }
            versions
        })
    };
    let out = hub.retrain(Language::En).unwrap();
    done.store(true, Ordering::Release);
    let versions = stream.join().unwrap();

    assert_eq!((out.previous_version, out.version), (Some(1), 2));
    assert_eq!(out.pool_size, 100);
    assert!(versions.iter().all(|v| *v == 1 || *v == 2));
    assert!(versions.windows(2).all(|w| w[0] <= w[1]));
    let after = hub.score(PROBE, None, false).unwrap();
    assert_eq!(after.version, 2);
    assert_eq!(after.prediction, expected);
    assert!(dir.path().join("registry/models/en/v1/bundle.toml").exists());
    assert_eq!(hub.registry().version(Language::Hi), Some(1));
}

#[test]
fn concurrent_retrain_is_busy() {
    let dir = tempfile::tempdir().unwrap();
    let hub = Arc::new(common::hub(dir.path(), 300));
    inject(&hub, 60, Label::Abusive);
    let first = {
        let hub = hub.clone();
        thread::spawn(move || hub.retrain(Language::En))
    };
    while !hub.is_retraining(Language::En) && !first.is_finished() {
        thread::yield_now();
    }
    if hub.is_retraining(Language::En) {
        assert!(matches!(hub.retrain(Language::En), Err(Error::Busy(Language::En))));
    }
    assert_eq!(first.join().unwrap().unwrap().version, 2);
    assert!(matches!(hub.retrain(Language::En), Ok(o) if o.version == 3));
}

#[test]
fn bias_guard_aborts_one_class_pools() {
    let dir = tempfile::tempdir().unwrap();
    let seeded = common::hub(dir.path(), 60);
    drop(seeded);
    let policy = RetrainPolicy::default();
    let hub = Hub::open(common::settings(dir.path(), policy)).unwrap();
    inject(&hub, 60, Label::Hate);
    assert!(matches!(
        hub.retrain(Language::En),
        Err(Error::BiasGuard { label: Label::Hate, .. })
    ));
    assert_eq!(hub.registry().version(Language::En), Some(1));
}

#[test]
fn restart_keeps_queue_and_current_version() {
    let dir = tempfile::tempdir().unwrap();
    let hub = common::hub(dir.path(), 300);
    let id = hub.score(PROBE, None, true).unwrap().record_id.unwrap();
    drop(hub);
    let hub = Hub::open(common::settings(dir.path(), RetrainPolicy::default())).unwrap();
    assert_eq!(hub.registry().version(Language::En), Some(1));
    assert_eq!(hub.review_queue(None, 10)[0].id, id);
    assert!(matches!(hub.score("", None, true), Err(Error::EmptyText)));
    assert!(matches!(hub.score("x", Some(Language::HiCodemix), true), Err(Error::NoModel(_))));
    assert_eq!(hub.feedback().len(), 1);
}
