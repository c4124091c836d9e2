use std::path::PathBuf;

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use hatewatch_hub::Error as HubError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Startup and configuration failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {reason}")]
    Config { path: PathBuf, reason: String },
    #[error(transparent)]
    Hub(#[from] HubError),
    #[error(transparent)]
    Core(#[from] hatewatch_core::Error),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("background task failed: {0}")]
    Task(String),
    #[error("invalid benchmark: {0}")]
    Bench(String),
}

/// The JSON body of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
            },
        }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<HubError> for ApiError {
    fn from(e: HubError) -> Self {
        let msg = e.to_string();
        let (status, code) = match &e {
            HubError::EmptyText => (StatusCode::BAD_REQUEST, "empty_text"),
            HubError::Oversize { .. } => (StatusCode::BAD_REQUEST, "oversize_text"),
            HubError::EmptyVerdict => (StatusCode::BAD_REQUEST, "invalid_verdict"),
            HubError::NoModel(_) => (StatusCode::NOT_FOUND, "no_model"),
            HubError::UnknownId(_) => (StatusCode::NOT_FOUND, "unknown_id"),
            HubError::AlreadyResolved(_) => (StatusCode::CONFLICT, "already_resolved"),
            HubError::Busy(_) => (StatusCode::CONFLICT, "retrain_busy"),
            HubError::PoolTooSmall { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "pool_too_small"),
            HubError::BiasGuard { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "class_bias"),
            HubError::Policy(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_policy"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        if status.is_server_error() {
            tracing::error!(error = %msg, "request failed");
        }
        Self::new(status, code, msg)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}
