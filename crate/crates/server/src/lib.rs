//! CLI and HTTP/WebSocket service for one embedding dataset.
//!
//! `atlas ingest` stores a prepared table in the artifact cache, `atlas compute`
//! adds clusters and label plans, and `atlas serve` exposes them over HTTP.

pub mod api;
pub mod cache;
pub mod cli;
pub mod dataset;
pub mod fetch;
pub mod pipeline;
pub mod session;

use std::future::Future;
use std::sync::Arc;

pub use api::router;
pub use cache::Cache;
pub use cli::{open_session, run};
pub use dataset::{prepare, DatasetSpec, Prepared};
pub use pipeline::{compute, Artifacts};
pub use session::{Dataset, Session};

/// Serves the API on an already bound listener until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    session: Arc<Session>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(session))
        .with_graceful_shutdown(shutdown)
        .await
}
