//! HTTP surface of the consortium service.
//!
//! All endpoints live under `/api/v1` and speak JSON, except CSV import
//! and export. Protected routes expect `Authorization: Bearer <token>`
//! from `POST /api/v1/auth/login`. Clients follow activity by polling
//! `GET /api/v1/changes?since=<head>`.

pub mod config;
pub mod error;
mod extract;
pub mod routes;

use std::sync::Arc;

use consortium_core::Consortium;

pub use config::ServiceConfig;
pub use error::{status_for, ApiError};
pub use routes::{router, AppState};

/// Binds and serves until ctrl-c.
pub async fn serve(consortium: Arc<Consortium>, config: &ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.addr()).await?;
    tracing::info!(
        "listening on http://{} (dev mode {})",
        listener.local_addr()?,
        if config.dev_mode() { "on" } else { "off" }
    );
    axum::serve(listener, router(consortium))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
