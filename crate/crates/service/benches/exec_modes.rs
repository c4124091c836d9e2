use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hatewatch_core::corpus::save_corpus;
use hatewatch_core::synth::{generate_synthetic_corpus, SynthSpec};
use hatewatch_core::{ExecMode, Language, LexiconSet};
use hatewatch_hub::RetrainPolicy;
use hatewatch_service::{open_hub, router, ServiceConfig};
use tower::ServiceExt;

fn page_scoring(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let lx = LexiconSet::bundled();
    let spec = SynthSpec::new(&[(Language::En, 600)], [0.4, 0.2, 0.4], 5);
    let records = generate_synthetic_corpus(&spec, &lx).unwrap();
    let corpus = dir.path().join("base.tsv");
    save_corpus(&corpus, &records).unwrap();
    let config = ServiceConfig {
        registry_dir: dir.path().join("registry"),
        feedback_log: dir.path().join("feedback.jsonl"),
        policy: RetrainPolicy {
            base_corpus: Some(corpus),
            ..RetrainPolicy::default()
        },
        ..ServiceConfig::default()
    };
    let hub = Arc::new(open_hub(&config).unwrap());
    let comments: Vec<&str> = records.iter().take(500).map(|r| r.text.as_str()).collect();
    let body = serde_json::json!({ "comments": comments, "language": "en" }).to_string();
    let rt = tokio::runtime::Runtime::new().unwrap();

    let mut g = c.benchmark_group("page_score_500");
    g.sample_size(20);
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        let app = router(hub.clone(), &ServiceConfig { mode, ..config.clone() });
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &app, |b, app| {
            b.to_async(&rt).iter(|| async {
                let req = Request::builder()
                    .method(Method::POST)
                    .uri("/api/v1/page/score?capture=false")
                    .header(header::CONTENT_TYPE, "application/json")
                    .body(Body::from(body.clone()))
                    .unwrap();
                let resp = app.clone().oneshot(req).await.unwrap();
                axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, page_scoring);
criterion_main!(benches);
