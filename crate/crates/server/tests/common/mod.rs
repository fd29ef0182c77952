#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use atlas_core::clustering::ClusterParams;
use atlas_core::data::{ingest, ColumnTable, Format, IngestOptions};
use atlas_server::{compute, prepare, DatasetSpec, Session};
use tokio::sync::oneshot;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn wine_table() -> ColumnTable {
    let bytes = std::fs::read(fixture("wine_sample.csv")).unwrap();
    ingest(&bytes, Format::Csv, &IngestOptions::default()).unwrap()
}

pub fn wine_spec() -> DatasetSpec {
    DatasetSpec {
        x: Some("x".into()),
        y: Some("y".into()),
        text: Some("description".into()),
        category: Some("country".into()),
        ..Default::default()
    }
}

pub fn session_for(table: ColumnTable, spec: DatasetSpec) -> Arc<Session> {
    let prepared = prepare(table, spec).unwrap();
    let artifacts = compute(&prepared, &ClusterParams::default()).unwrap();
    Arc::new(Session::from_prepared(prepared, artifacts).unwrap())
}

pub fn wine_session() -> Arc<Session> {
    session_for(wine_table(), wine_spec())
}

pub struct Server {
    pub addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
}

impl Server {
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
    }
}

pub async fn spawn(session: Arc<Session>) -> Server {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = oneshot::channel::<()>();
    tokio::spawn(atlas_server::serve(listener, session, async move {
        let _ = rx.await;
    }));
    Server { addr, stop: Some(tx) }
}
