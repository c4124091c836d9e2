#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use hatewatch_core::corpus::{save_corpus, UnifiedRecord};
use hatewatch_core::synth::{generate_synthetic_corpus, SynthSpec};
use hatewatch_core::{Language, LexiconSet};
use hatewatch_hub::{Hub, RetrainPolicy};
use hatewatch_service::{open_hub, router, ServiceConfig};
use serde_json::Value;
use tower::ServiceExt;

/// Borderline between hate and neither under the synthetic base corpus.
pub const PROBE: &str = "immigrants and the budget";

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub records: Vec<UnifiedRecord>,
    pub config: ServiceConfig,
    pub hub: Arc<Hub>,
    pub app: Router,
}

pub fn config(dir: &Path) -> ServiceConfig {
    ServiceConfig {
        registry_dir: dir.join("registry"),
        feedback_log: dir.join("feedback.jsonl"),
        policy: RetrainPolicy {
            base_corpus: Some(dir.join("base.tsv")),
            ..RetrainPolicy::default()
        },
        ..ServiceConfig::default()
    }
}

/// Service over English and Hindi models bootstrapped from a synthetic corpus.
pub fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec::new(&[(Language::En, 300), (Language::Hi, 300)], [0.4, 0.2, 0.4], 7);
    let records = generate_synthetic_corpus(&spec, &LexiconSet::bundled()).unwrap();
    save_corpus(dir.path().join("base.tsv"), &records).unwrap();
    let config = config(dir.path());
    let hub = Arc::new(open_hub(&config).unwrap());
    let app = router(hub.clone(), &config);
    Fixture {
        dir,
        records,
        config,
        hub,
        app,
    }
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}
