mod common;

use hatewatch_service::bench::run;
use hatewatch_service::Error;

#[tokio::test]
async fn report_has_ordered_percentiles() {
    let f = common::fixture();
    let texts: Vec<String> = f.records.iter().take(50).map(|r| r.text.clone()).collect();
    let report = run(f.app.clone(), &texts, 200, 4).await.unwrap();
    assert_eq!(report.requests, 200);
    assert_eq!(report.failures, 0);
    assert!(report.p50_ms <= report.p95_ms && report.p95_ms <= report.p99_ms);
    assert!(report.p99_ms <= report.max_ms);
    assert!(report.throughput_rps > 0.0);
    assert!(f.hub.feedback().is_empty());
    assert!(report.render().contains("p95"));
}

#[tokio::test]
async fn zero_requests_is_an_error() {
    let f = common::fixture();
    let texts = vec!["hello".to_string()];
    assert!(matches!(run(f.app.clone(), &texts, 0, 1).await, Err(Error::Bench(_))));
    assert!(matches!(run(f.app.clone(), &[], 10, 1).await, Err(Error::Bench(_))));
}
