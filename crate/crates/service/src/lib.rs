//! REST moderation API.
//!
//! Routes live under `/api/v1` and exchange JSON. Every error response is
//! an [`ErrorBody`] `{code, message}` with a 4xx status for caller mistakes
//! and 5xx for internal failures. When a static directory is configured it
//! is served at `/` for the moderation web UI.

pub mod api;
pub mod bench;
pub mod config;
pub mod error;

use std::sync::Arc;

use axum::Router;
use hatewatch_core::{Language, LexiconSet};
use hatewatch_hub::{Hub, HubSettings};
use tower_http::services::ServeDir;

pub use api::{AppState, PageScore, ScoreResult};
pub use bench::LatencyReport;
pub use config::ServiceConfig;
pub use error::{ApiError, Error, ErrorBody, Result};

/// Opens the hub described by `config`, bootstrapping missing models when
/// asked to.
pub fn open_hub(config: &ServiceConfig) -> Result<Hub> {
    let lexicons = match &config.lexicon_dir {
        Some(dir) => LexiconSet::from_dir(dir)?,
        None => LexiconSet::bundled(),
    };
    let hub = Hub::open(HubSettings {
        registry_dir: config.registry_dir.clone(),
        feedback_log: config.feedback_log.clone(),
        policy: config.policy.clone(),
        routing: config.routing,
        lexicons: Arc::new(lexicons),
    })?;
    if config.bootstrap {
        for lang in Language::ALL {
            if let Some(v) = hub.bootstrap(lang)? {
                tracing::info!(%lang, version = v, "bootstrapped model from base corpus");
            }
        }
    }
    Ok(hub)
}

pub fn router(hub: Arc<Hub>, config: &ServiceConfig) -> Router {
    let api = api::routes(AppState {
        hub,
        mode: config.mode,
    });
    match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `config.listen` and serves until ctrl-c.
pub async fn serve(config: ServiceConfig) -> Result<()> {
    let hub = {
        let cfg = config.clone();
        tokio::task::spawn_blocking(move || open_hub(&cfg))
            .await
            .map_err(|e| Error::Task(e.to_string()))??
    };
    let app = router(Arc::new(hub), &config);
    let listener = tokio::net::TcpListener::bind(&config.listen)
        .await
        .map_err(|source| Error::Bind {
            addr: config.listen.clone(),
            source,
        })?;
    tracing::info!(addr = %config.listen, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown_signal())
        .await
        .map_err(|source| Error::Bind {
            addr: config.listen.clone(),
            source,
        })
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    tracing::info!("shutting down");
}
