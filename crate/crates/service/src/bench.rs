//! In-process latency benchmark against the router.
//!
//! Requests go through the full axum stack via `tower::ServiceExt::oneshot`
//! with feedback capture off, so the numbers cover routing, JSON, language
//! detection, normalization and scoring but no socket.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use serde::{Deserialize, Serialize};
use tower::ServiceExt;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub requests: usize,
    pub concurrency: usize,
    pub failures: usize,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub p99_ms: f64,
    pub mean_ms: f64,
    pub max_ms: f64,
    pub throughput_rps: f64,
}

impl LatencyReport {
    pub fn render(&self) -> String {
        format!(
            "requests {}  concurrency {}  failures {}\np50 {:.3} ms  p95 {:.3} ms  p99 {:.3} ms  mean {:.3} ms  max {:.3} ms\nthroughput {:.1} req/s\n",
            self.requests,
            self.concurrency,
            self.failures,
            self.p50_ms,
            self.p95_ms,
            self.p99_ms,
            self.mean_ms,
            self.max_ms,
            self.throughput_rps
        )
    }
}

/// Nearest-rank percentile of ascending `sorted`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (q / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Issues `requests` single-comment score requests, cycling through `texts`
/// in order, from `concurrency` workers.
pub async fn run(router: Router, texts: &[String], requests: usize, concurrency: usize) -> Result<LatencyReport> {
    if requests == 0 {
        return Err(Error::Bench("request count must be positive".into()));
    }
    if texts.is_empty() {
        return Err(Error::Bench("no request texts".into()));
    }
    let concurrency = concurrency.clamp(1, requests);
    let bodies: Arc<Vec<String>> = Arc::new(
        (0..requests)
            .map(|i| serde_json::json!({ "text": texts[i % texts.len()] }).to_string())
            .collect(),
    );
    let next = Arc::new(AtomicUsize::new(0));
    let started = Instant::now();
    let workers: Vec<_> = (0..concurrency)
        .map(|_| {
            let (router, bodies, next) = (router.clone(), bodies.clone(), next.clone());
            tokio::spawn(async move {
                let mut lat = Vec::new();
                let mut failures = 0usize;
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= bodies.len() {
                        break;
                    }
                    let req = Request::builder()
                        .method(Method::POST)
                        .uri("/api/v1/score?capture=false")
                        .header(header::CONTENT_TYPE, "application/json")
                        .body(Body::from(bodies[i].clone()))
                        .expect("static request parts are valid");
                    let t = Instant::now();
                    let ok = match router.clone().oneshot(req).await {
                        Ok(resp) => {
                            let status = resp.status();
                            axum::body::to_bytes(resp.into_body(), usize::MAX).await.is_ok()
                                && status == StatusCode::OK
                        }
                        Err(_) => false,
                    };
                    lat.push(t.elapsed().as_secs_f64() * 1e3);
                    failures += usize::from(!ok);
                }
                (lat, failures)
            })
        })
        .collect();
    let mut lat = Vec::with_capacity(requests);
    let mut failures = 0;
    for w in workers {
        let (l, f) = w.await.map_err(|e| Error::Bench(e.to_string()))?;
        lat.extend(l);
        failures += f;
    }
    let wall = started.elapsed().as_secs_f64();
    lat.sort_by(f64::total_cmp);
    Ok(LatencyReport {
        requests,
        concurrency,
        failures,
        p50_ms: percentile(&lat, 50.0),
        p95_ms: percentile(&lat, 95.0),
        p99_ms: percentile(&lat, 99.0),
        mean_ms: lat.iter().sum::<f64>() / lat.len() as f64,
        max_ms: lat.last().copied().unwrap_or(0.0),
        throughput_rps: requests as f64 / wall.max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nearest_rank() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&xs, 50.0), 50.0);
        assert_eq!(percentile(&xs, 95.0), 95.0);
        assert_eq!(percentile(&xs, 99.0), 99.0);
        assert_eq!(percentile(&[7.0], 99.0), 7.0);
    }

    proptest! {
        #[test]
        fn percentiles_are_ordered(mut xs in prop::collection::vec(0.0f64..1e3, 1..300)) {
            xs.sort_by(f64::total_cmp);
            let (a, b, c) = (percentile(&xs, 50.0), percentile(&xs, 95.0), percentile(&xs, 99.0));
            prop_assert!(a <= b && b <= c);
        }
    }
}
