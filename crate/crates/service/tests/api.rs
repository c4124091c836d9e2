mod common;

use axum::http::StatusCode;
use common::{fixture, get, post, PROBE};
use hatewatch_core::{Label, Language};
use hatewatch_service::api::{CheckResult, PageScore, ReviewList, ScoreResult};
use hatewatch_service::ErrorBody;
use serde_json::{json, Value};

fn texts(f: &common::Fixture, lang: Language, label: Label, n: usize) -> Vec<String> {
    f.records
        .iter()
        .filter(|r| r.language == lang && r.label == label)
        .take(n)
        .map(|r| r.text.clone())
        .collect()
}

fn parse<T: serde::de::DeserializeOwned>(v: Value) -> T {
    serde_json::from_value(v).unwrap()
}

#[tokio::test]
async fn devanagari_without_hint_routes_to_hindi() {
    let f = fixture();
    let (s, v) = post(&f.app, "/api/v1/score", json!({"text": "ये लोग देश के लिए खतरा हैं, इन्हें रोको।"})).await;
    assert_eq!(s, StatusCode::OK);
    let r: ScoreResult = parse(v);
    assert_eq!(r.language, Language::Hi);
    assert!(r.routing.is_some());
    assert_eq!(r.model_version, 1);
}

#[tokio::test]
async fn probabilities_sum_to_one_and_repeat_exactly() {
    let f = fixture();
    for text in ["have a nice day", PROBE, "shut up you idiot", "all immigrants are vermin"] {
        let (_, a) = post(&f.app, "/api/v1/score?capture=false", json!({"text": text})).await;
        let (_, b) = post(&f.app, "/api/v1/score?capture=false", json!({"text": text})).await;
        let (a, b): (ScoreResult, ScoreResult) = (parse(a), parse(b));
        let p = a.probabilities.to_array();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(a.label, Label::argmax(&p));
        assert_eq!(a.probabilities, b.probabilities);
        assert_eq!(a.id, None);
    }
    assert!(f.hub.feedback().is_empty());
}

#[tokio::test]
async fn invalid_text_is_rejected_and_not_recorded() {
    let f = fixture();
    let (s, v) = post(&f.app, "/api/v1/score", json!({"text": ""})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(parse::<ErrorBody>(v).code, "empty_text");
    let (s, v) = post(&f.app, "/api/v1/score", json!({"text": "a".repeat(10_001)})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(parse::<ErrorBody>(v).code, "oversize_text");
    let (s, v) = post(&f.app, "/api/v1/score", json!({"txt": "x"})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(parse::<ErrorBody>(v).code, "invalid_request");
    let (s, v) = post(&f.app, "/api/v1/score", json!({"text": "x", "language": "hi_codemix"})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(parse::<ErrorBody>(v).code, "no_model");
    assert!(f.hub.feedback().is_empty());
}

#[tokio::test]
async fn page_percentages_follow_the_planted_labels() {
    let f = fixture();
    let mut comments = texts(&f, Language::En, Label::Hate, 2);
    comments.extend(texts(&f, Language::En, Label::Abusive, 1));
    comments.extend(texts(&f, Language::En, Label::Neither, 7));
    let (s, v) = post(&f.app, "/api/v1/page/score", json!({"comments": comments})).await;
    assert_eq!(s, StatusCode::OK);
    let page: PageScore = parse(v);
    assert_eq!(page.total, 10);
    assert_eq!(
        (page.percentages.hateful, page.percentages.abusive, page.percentages.neither),
        (20.0, 10.0, 70.0)
    );
    // Each per-comment result agrees with a standalone score request.
    for (c, r) in comments.iter().zip(&page.results) {
        let (_, v) = post(&f.app, "/api/v1/score?capture=false", json!({"text": c})).await;
        let single: ScoreResult = parse(v);
        assert_eq!(single.label, r.label);
        assert_eq!(single.probabilities, r.probabilities);
    }
    let recount = PageScore::from_results(page.results.clone());
    assert_eq!(recount.percentages, page.percentages);
    assert_eq!(f.hub.feedback().len(), 10);
}

#[tokio::test]
async fn page_bounds() {
    let f = fixture();
    let (s, v) = post(&f.app, "/api/v1/page/score", json!({"comments": ["have a nice day"]})).await;
    assert_eq!(s, StatusCode::OK);
    let page: PageScore = parse(v);
    let p = page.percentages;
    assert!([p.hateful, p.abusive, p.neither].contains(&100.0));
    assert!((p.hateful + p.abusive + p.neither - 100.0).abs() < 0.01);

    let (s, v) = post(&f.app, "/api/v1/page/score", json!({"comments": []})).await;
    assert_eq!((s, parse::<ErrorBody>(v).code.as_str()), (StatusCode::BAD_REQUEST, "invalid_page"));
    let big = vec!["hi"; 1001];
    let (s, _) = post(&f.app, "/api/v1/page/score", json!({"comments": big})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, v) = post(&f.app, "/api/v1/page/score", json!({"comments": ["ok", " "]})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(parse::<ErrorBody>(v).message.starts_with("comment 1"));
    assert_eq!(f.hub.feedback().len(), 1);
}

#[tokio::test]
async fn check_blocks_everything_but_neither() {
    let f = fixture();
    for (label, allow) in [(Label::Neither, true), (Label::Hate, false), (Label::Abusive, false)] {
        let text = &texts(&f, Language::En, label, 1)[0];
        let (s, v) = post(&f.app, "/api/v1/check", json!({"text": text})).await;
        assert_eq!(s, StatusCode::OK);
        let r: CheckResult = parse(v);
        assert_eq!(r.label, label, "{text}");
        assert_eq!(r.allow, allow);
    }
    assert!(f.hub.feedback().is_empty());
}

#[tokio::test]
async fn review_and_resolve() {
    let f = fixture();
    let mut ids = Vec::new();
    for _ in 0..3 {
        let (_, v) = post(&f.app, "/api/v1/score", json!({"text": PROBE})).await;
        let r: ScoreResult = parse(v);
        assert!(r.queued);
        ids.push(r.id.unwrap());
    }
    let (_, v) = post(&f.app, "/api/v1/score", json!({"text": texts(&f, Language::En, Label::Hate, 1)[0]})).await;
    assert!(!parse::<ScoreResult>(v).queued);

    let (s, v) = get(&f.app, "/api/v1/review?language=en&limit=2").await;
    assert_eq!(s, StatusCode::OK);
    let list: ReviewList = parse(v);
    assert_eq!(list.threshold, 0.60);
    assert_eq!(list.items.iter().map(|r| r.id).collect::<Vec<_>>(), ids[..2]);
    let (_, v) = get(&f.app, "/api/v1/review?language=hi").await;
    assert!(parse::<ReviewList>(v).items.is_empty());
    let (s, _) = get(&f.app, "/api/v1/review?language=fr").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let uri = |id: u64| format!("/api/v1/feedback/{id}/resolve");
    let (s, v) = post(&f.app, &uri(ids[0]), json!({"verdict": "relabel"})).await;
    assert_eq!((s, parse::<ErrorBody>(v).code.as_str()), (StatusCode::BAD_REQUEST, "invalid_verdict"));
    let (s, v) = post(&f.app, &uri(999), json!({"verdict": "confirm"})).await;
    assert_eq!((s, parse::<ErrorBody>(v).code.as_str()), (StatusCode::NOT_FOUND, "unknown_id"));
    let (s, v) = post(&f.app, &uri(ids[0]), json!({"verdict": "relabel", "label": "hate"})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["verdict"], json!({"status": "relabeled", "label": "hate"}));
    let (s, v) = post(&f.app, &uri(ids[0]), json!({"verdict": "confirm"})).await;
    assert_eq!((s, parse::<ErrorBody>(v).code.as_str()), (StatusCode::CONFLICT, "already_resolved"));
    let (s, _) = post(&f.app, &uri(ids[1]), json!({"verdict": "confirm"})).await;
    assert_eq!(s, StatusCode::OK);

    let (_, v) = get(&f.app, "/api/v1/review").await;
    assert_eq!(parse::<ReviewList>(v).items.iter().map(|r| r.id).collect::<Vec<_>>(), [ids[2]]);
    assert_eq!(f.hub.feedback().training_pool(Language::En).len(), 2);

    let (s, v) = post(&f.app, "/api/v1/retrain", json!({"language": "en"})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let e: ErrorBody = parse(v);
    assert_eq!(e.code, "pool_too_small");
    assert!(e.message.contains("2 resolved samples"));
}

#[tokio::test]
async fn models_and_health() {
    let f = fixture();
    let (s, v) = get(&f.app, "/api/v1/models").await;
    assert_eq!(s, StatusCode::OK);
    let models = v["models"].as_array().unwrap();
    assert_eq!(models.len(), 2);
    assert_eq!(models[0]["language"], "en");
    assert_eq!(models[0]["version"], 1);
    assert_eq!(models[0]["kind"], "linear");
    let (s, v) = get(&f.app, "/healthz").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v, json!({"status": "ok", "languages": ["en", "hi"]}));
}

#[tokio::test]
async fn static_assets_are_served_beside_the_api() {
    let f = fixture();
    let web = f.dir.path().join("web");
    std::fs::create_dir_all(&web).unwrap();
    std::fs::write(web.join("index.html"), "<h1>moderation</h1>").unwrap();
    let config = hatewatch_service::ServiceConfig {
        static_dir: Some(web),
        ..f.config.clone()
    };
    let app = hatewatch_service::router(f.hub.clone(), &config);
    let (s, v) = get(&app, "/index.html").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v, Value::String("<h1>moderation</h1>".into()));
    let (s, _) = get(&app, "/healthz").await;
    assert_eq!(s, StatusCode::OK);
}
