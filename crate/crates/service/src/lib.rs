//! HTTP façade over the editor: sessions, suggestions, scoring, playability,
//! share tokens, an append-only event journal and journal-derived analytics.

pub mod analytics;
mod api;
mod config;
mod error;
pub mod journal;
mod models;
mod store;

pub use api::{router, EditRequest, SessionView};
pub use config::ServiceConfig;
pub use error::{ApiError, ServiceError};
pub use journal::{Journal, JournalRecord};
pub use models::Models;
pub use store::SessionStore;

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

/// Shared state behind every handler.
pub struct AppState {
    pub config: ServiceConfig,
    pub store: SessionStore,
    pub models: Option<Models>,
}

impl AppState {
    /// Opens the data directory and restores sessions from snapshot and journal.
    pub fn open(config: ServiceConfig, models: Option<Models>) -> Result<Self, ServiceError> {
        let store = SessionStore::open(&config.data_dir)?;
        Ok(Self { config, store, models })
    }

    /// Drops idle sessions and writes a snapshot.
    pub fn maintain(&self) -> Result<usize, ServiceError> {
        let now = lode_core::editor::now_millis();
        let dropped = self.store.expire_idle(now, self.config.idle_timeout.as_millis() as u64);
        self.store.write_snapshot()?;
        Ok(dropped)
    }
}

/// Serves until `shutdown` resolves, snapshotting on an interval and on exit.
pub async fn serve(
    state: Arc<AppState>,
    addr: SocketAddr,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::Bind { addr, source })?;
    log::info!("listening on {}", listener.local_addr().unwrap_or(addr));

    let maint = state.clone();
    let interval = state.config.snapshot_interval;
    let ticker = tokio::spawn(async move {
        let mut tick = tokio::time::interval(interval);
        tick.tick().await;
        loop {
            tick.tick().await;
            let s = maint.clone();
            match tokio::task::spawn_blocking(move || s.maintain()).await {
                Ok(Ok(n)) if n > 0 => log::info!("expired {n} idle sessions"),
                Ok(Err(e)) => log::error!("maintenance failed: {e}"),
                _ => {}
            }
        }
    });

    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|source| ServiceError::Io {
            path: "<listener>".into(),
            source,
        })?;
    ticker.abort();
    state.store.write_snapshot()
}
