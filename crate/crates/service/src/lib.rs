//! Local HTTP API for interactive synthesis preview and evaluation.
//!
//! Routes:
//!
//! - `POST /sessions` multipart upload (`mask` file, optional `threshold`)
//! - `GET /sessions/{id}`
//! - `POST /sessions/{id}/preview`
//! - `POST /sessions/{id}/export`
//! - `GET /healthz`
//! - `GET /openapi.yaml`
//!
//! With a UI directory configured, every other path is served from it.

pub mod api;
pub mod error;
pub mod rle;
pub mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use tower_http::services::ServeDir;

pub use api::{
    AppState, ExportRequest, ExportResponse, PreviewResponse, SessionInfo, SynthRequest,
};
pub use error::{ApiError, ErrorBody, FieldError};
pub use rle::RleMask;
pub use session::{mask_digest, Session, SessionStore};

pub const OPENAPI_YAML: &str = include_str!("../openapi.yaml");

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(3600);
const MAX_UPLOAD: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub session_ttl: Duration,
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: DEFAULT_BIND.parse().expect("valid default bind address"),
            session_ttl: DEFAULT_SESSION_TTL,
            ui_dir: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        source: std::io::Error,
    },
    #[error("UI directory {0} does not exist")]
    MissingUiDir(PathBuf),
    #[error("server error: {0}")]
    Serve(#[from] std::io::Error),
}

pub fn router(store: AppState, ui_dir: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/sessions", post(api::create_session))
        .route("/sessions/{id}", get(api::get_session))
        .route("/sessions/{id}/preview", post(api::preview))
        .route("/sessions/{id}/export", post(api::export))
        .route("/healthz", get(api::healthz))
        .route("/openapi.yaml", get(api::openapi))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD))
        .with_state(store);
    match ui_dir {
        Some(dir) => {
            app.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true))
        }
        None => app,
    }
}

/// Binds and serves until the process is stopped. Expired sessions are
/// purged once per TTL (at most once a minute).
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    if let Some(dir) = &config.ui_dir {
        if !dir.is_dir() {
            return Err(ServiceError::MissingUiDir(dir.clone()));
        }
    }
    let store = Arc::new(SessionStore::new(config.session_ttl));
    let purge_every = config
        .session_ttl
        .clamp(Duration::from_secs(1), Duration::from_secs(60));
    let purger = Arc::clone(&store);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(purge_every);
        loop {
            tick.tick().await;
            let n = purger.purge_expired();
            if n > 0 {
                tracing::info!(purged = n, "expired sessions removed");
            }
        }
    });
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: config.bind,
            source,
        })?;
    tracing::info!(addr = %config.bind, "listening");
    axum::serve(listener, router(store, config.ui_dir)).await?;
    Ok(())
}
