//! `/api/v1` routes and their JSON bodies.

use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use hatewatch_core::langid::RoutingDecision;
use hatewatch_core::{par, ExecMode, Label, Language};
use hatewatch_hub::{check_text, FeedbackRecord, Hub, ModelInfo, RetrainOutcome, Scored, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;

/// Most comments accepted by one page-score request.
pub const MAX_PAGE: usize = 1000;
pub const DEFAULT_REVIEW_LIMIT: usize = 50;

#[derive(Clone)]
pub struct AppState {
    pub hub: Arc<Hub>,
    /// How the comments of one page are scored.
    pub mode: ExecMode,
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probabilities {
    pub hate: f64,
    pub abusive: f64,
    pub neither: f64,
}

impl From<[f64; 3]> for Probabilities {
    fn from(p: [f64; 3]) -> Self {
        Self {
            hate: p[0],
            abusive: p[1],
            neither: p[2],
        }
    }
}

impl Probabilities {
    pub fn to_array(self) -> [f64; 3] {
        [self.hate, self.abusive, self.neither]
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ScoreRequest {
    pub text: String,
    #[serde(default)]
    pub language: Option<Language>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct CaptureQuery {
    #[serde(default = "yes")]
    pub capture: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    /// Feedback id of the captured record.
    pub id: Option<u64>,
    pub label: Label,
    pub probabilities: Probabilities,
    pub confidence: f64,
    /// Whether the record entered the review queue.
    pub queued: bool,
    pub language: Language,
    pub model_version: u64,
    pub latency_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<RoutingDecision>,
}

impl ScoreResult {
    fn new(s: Scored, threshold: f64, started: Instant) -> Self {
        let confidence = s.prediction.confidence();
        Self {
            id: s.record_id,
            label: s.prediction.label,
            probabilities: s.prediction.probs.into(),
            confidence,
            queued: s.record_id.is_some() && confidence < threshold,
            language: s.language,
            model_version: s.version,
            latency_ms: started.elapsed().as_secs_f64() * 1e3,
            routing: s.routing,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct PageRequest {
    pub comments: Vec<String>,
    #[serde(default)]
    pub language: Option<Language>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassShares {
    pub hateful: f64,
    pub abusive: f64,
    pub neither: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub hateful: usize,
    pub abusive: usize,
    pub neither: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageScore {
    pub percentages: ClassShares,
    pub counts: ClassCounts,
    pub total: usize,
    pub results: Vec<ScoreResult>,
}

impl PageScore {
    /// Aggregates per-comment results: `100 · count / total` per class.
    pub fn from_results(results: Vec<ScoreResult>) -> Self {
        let mut c = [0usize; 3];
        for r in &results {
            c[r.label.index()] += 1;
        }
        let total = results.len();
        let pct = |n: usize| if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
        Self {
            percentages: ClassShares {
                hateful: pct(c[0]),
                abusive: pct(c[1]),
                neither: pct(c[2]),
            },
            counts: ClassCounts {
                hateful: c[0],
                abusive: c[1],
                neither: c[2],
            },
            total,
            results,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct CheckRequest {
    pub text: String,
    #[serde(default)]
    pub language: Option<Language>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub allow: bool,
    pub label: Label,
    pub probabilities: Probabilities,
    pub language: Language,
    pub model_version: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Confirm,
    Relabel,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ResolveRequest {
    pub verdict: VerdictKind,
    #[serde(default)]
    pub label: Option<Label>,
}

impl ResolveRequest {
    fn verdict(&self) -> Result<Verdict, ApiError> {
        match (self.verdict, self.label) {
            (VerdictKind::Confirm, None) => Ok(Verdict::Confirmed),
            (VerdictKind::Relabel, Some(label)) => Ok(Verdict::Relabeled { label }),
            (VerdictKind::Confirm, Some(_)) => Err(ApiError::bad_request(
                "invalid_verdict",
                "confirm takes no label",
            )),
            (VerdictKind::Relabel, None) => Err(ApiError::bad_request(
                "invalid_verdict",
                "relabel requires a label",
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReviewQuery {
    #[serde(default)]
    pub language: Option<Language>,
    #[serde(default)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewList {
    pub threshold: f64,
    pub items: Vec<FeedbackRecord>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RetrainRequest {
    pub language: Language,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelList {
    pub models: Vec<ModelInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub languages: Vec<Language>,
}

pub fn routes(state: AppState) -> Router {
    Router::new()
        .route("/api/v1/score", post(score))
        .route("/api/v1/page/score", post(page_score))
        .route("/api/v1/check", post(check))
        .route("/api/v1/feedback/{id}/resolve", post(resolve))
        .route("/api/v1/review", get(review))
        .route("/api/v1/retrain", post(retrain))
        .route("/api/v1/models", get(models))
        .route("/healthz", get(healthz))
        .with_state(state)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("invalid_request", e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v)
        .map_err(|e| ApiError::bad_request("invalid_query", e.body_text()))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn score(
    State(st): State<AppState>,
    q: Result<Query<CaptureQuery>, QueryRejection>,
    payload: Result<Json<ScoreRequest>, JsonRejection>,
) -> ApiResult<ScoreResult> {
    let started = Instant::now();
    let capture = query(q)?.capture;
    let req = body(payload)?;
    let hub = st.hub.clone();
    blocking(move || {
        let s = hub.score(&req.text, req.language, capture)?;
        Ok(Json(ScoreResult::new(s, hub.policy().threshold, started)))
    })
    .await
}

async fn page_score(
    State(st): State<AppState>,
    q: Result<Query<CaptureQuery>, QueryRejection>,
    payload: Result<Json<PageRequest>, JsonRejection>,
) -> ApiResult<PageScore> {
    let capture = query(q)?.capture;
    let req = body(payload)?;
    if req.comments.is_empty() || req.comments.len() > MAX_PAGE {
        return Err(ApiError::bad_request(
            "invalid_page",
            format!("a page holds 1 to {MAX_PAGE} comments, got {}", req.comments.len()),
        ));
    }
    for (i, c) in req.comments.iter().enumerate() {
        check_text(c).map_err(|e| {
            let mut err = ApiError::from(e);
            err.body.message = format!("comment {i}: {}", err.body.message);
            err
        })?;
    }
    let hub = st.hub.clone();
    blocking(move || {
        let threshold = hub.policy().threshold;
        let results = par::map(st.mode, &req.comments, |c| {
            let started = Instant::now();
            hub.score(c, req.language, capture)
                .map(|s| ScoreResult::new(s, threshold, started))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        Ok(Json(PageScore::from_results(results)))
    })
    .await
}

async fn check(
    State(st): State<AppState>,
    payload: Result<Json<CheckRequest>, JsonRejection>,
) -> ApiResult<CheckResult> {
    let req = body(payload)?;
    let hub = st.hub.clone();
    blocking(move || {
        let s = hub.score(&req.text, req.language, false)?;
        Ok(Json(CheckResult {
            allow: s.prediction.label == Label::Neither,
            label: s.prediction.label,
            probabilities: s.prediction.probs.into(),
            language: s.language,
            model_version: s.version,
        }))
    })
    .await
}

async fn resolve(
    State(st): State<AppState>,
    Path(id): Path<u64>,
    payload: Result<Json<ResolveRequest>, JsonRejection>,
) -> ApiResult<FeedbackRecord> {
    let verdict = body(payload)?.verdict()?;
    let hub = st.hub.clone();
    blocking(move || Ok(Json(hub.resolve(id, verdict)?))).await
}

async fn review(
    State(st): State<AppState>,
    q: Result<Query<ReviewQuery>, QueryRejection>,
) -> ApiResult<ReviewList> {
    let q = query(q)?;
    let limit = q.limit.unwrap_or(DEFAULT_REVIEW_LIMIT).min(MAX_PAGE);
    Ok(Json(ReviewList {
        threshold: st.hub.policy().threshold,
        items: st.hub.review_queue(q.language, limit),
    }))
}

async fn retrain(
    State(st): State<AppState>,
    payload: Result<Json<RetrainRequest>, JsonRejection>,
) -> ApiResult<RetrainOutcome> {
    let req = body(payload)?;
    let hub = st.hub.clone();
    blocking(move || Ok(Json(hub.retrain(req.language)?))).await
}

async fn models(State(st): State<AppState>) -> Json<ModelList> {
    Json(ModelList {
        models: st.hub.registry().models(),
    })
}

async fn healthz(State(st): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        languages: Language::ALL
            .into_iter()
            .filter(|&l| st.hub.registry().current(l).is_some())
            .collect(),
    })
}
