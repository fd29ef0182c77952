//! HTTP and WebSocket endpoints.
//!
//! JSON responses computed against a selection carry `"revision"`; binary
//! responses carry it in the `x-atlas-revision` header. A request that names a
//! `revision` other than the current one gets 409 so the client can refetch.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use atlas_core::data::{column_stats, export, ExportFormat};
use atlas_core::density::{encode_tile, kde, Extent};
use atlas_core::labeling::LabelPlan;
use atlas_core::neighbors::{text_search, Neighbor};
use atlas_core::query::{boxplot, heatmap2d, histogram1d, BinSpec, Predicate};
use atlas_core::view::Viewport;
use atlas_core::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast::error::RecvError;

use crate::session::{Dataset, Selection, Session, WriteError};

pub const REVISION_HEADER: &str = "x-atlas-revision";
pub const TOTAL_HEADER: &str = "x-atlas-total";
pub const STRIDE_HEADER: &str = "x-atlas-stride";
pub const ROWS_HEADER: &str = "x-atlas-rows";

/// Records per `/points` response unless `limit` says otherwise.
pub const DEFAULT_POINT_LIMIT: usize = 200_000;
/// Bytes per `/points` record: u32 row id, f32 x, f32 y, u32 category code.
pub const POINT_RECORD_LEN: usize = 16;
pub const DEFAULT_TILE_SIZE: usize = 256;
pub const MAX_TILE_SIZE: usize = 2048;
/// Kernel σ in grid cells for `/density` when none is given.
pub const DEFAULT_TILE_SIGMA: f64 = 4.0;
pub const DEFAULT_KNN: usize = 10;
pub const DEFAULT_SEARCH_LIMIT: usize = 100;

#[derive(Debug)]
pub enum ApiError {
    Core(Error),
    Conflict { expected: u64, current: u64 },
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Core(e)
    }
}

fn bad(msg: impl Into<String>) -> ApiError {
    ApiError::Core(Error::Param(msg.into()))
}

fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::NotFound(_) => StatusCode::NOT_FOUND,
        Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        Error::Param(_) | Error::Query(_) | Error::Schema(_) | Error::Ingest { .. } => StatusCode::BAD_REQUEST,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Core(e) => (status_of(&e), json!({ "error": e.to_string() })),
            ApiError::Conflict { expected, current } => (
                StatusCode::CONFLICT,
                json!({ "error": format!("revision {expected} is stale"), "revision": current }),
            ),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T = Response> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| bad(format!("malformed request body: {e}")))
}

fn json_response(value: Value) -> Response {
    Json(value).into_response()
}

/// Current selection, refusing a stale `revision` from the client.
fn selection_at(session: &Session, revision: Option<u64>) -> ApiResult<Selection> {
    let sel = session.selection();
    match revision {
        Some(r) if r != sel.revision => Err(ApiError::Conflict {
            expected: r,
            current: sel.revision,
        }),
        _ => Ok(sel),
    }
}

fn binary(bytes: Vec<u8>, content_type: &'static str, headers: &[(&'static str, String)]) -> Response {
    let mut res = (StatusCode::OK, bytes).into_response();
    let h = res.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    for (k, v) in headers {
        h.insert(*k, HeaderValue::from_str(v).expect("ascii header"));
    }
    res
}

pub fn router(session: Arc<Session>) -> Router {
    Router::new()
        .route("/schema", get(schema))
        .route("/stats/{column}", get(stats))
        .route("/query/histogram", post(histogram))
        .route("/query/heatmap", post(heatmap))
        .route("/query/boxplot", post(boxplot_query))
        .route("/selection", get(get_selection).post(post_selection))
        .route("/density", post(density))
        .route("/clusters", get(clusters))
        .route("/labels", get(labels))
        .route("/knn2d", post(knn2d))
        .route("/knnvec", post(knnvec))
        .route("/search", post(search))
        .route("/points", get(points))
        .route("/export", get(export_rows))
        .route("/updates", get(updates))
        .with_state(session)
}

async fn schema(State(s): State<Arc<Session>>) -> Response {
    let d = s.dataset();
    let columns: Vec<Value> = d
        .table
        .columns()
        .iter()
        .map(|c| json!({ "name": c.name(), "dtype": c.dtype() }))
        .collect();
    json_response(json!({
        "row_count": d.table.row_count(),
        "x": d.x,
        "y": d.y,
        "roles": d.spec,
        "columns": columns,
        "extent": d.artifacts.extent,
        "zoom_range": [d.artifacts.z_lo, d.artifacts.z_hi],
        "cluster_levels": d.artifacts.clusters.levels.len(),
        "has_vectors": d.vectors.is_some(),
        "revision": s.revision(),
    }))
}

async fn stats(State(s): State<Arc<Session>>, Path(column): Path<String>) -> ApiResult {
    let d = s.dataset();
    let st = column_stats(&d.table, &column)?;
    Ok(json_response(json!({ "column": column, "stats": st })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HistogramRequest {
    column: String,
    #[serde(default)]
    bins: Option<usize>,
    #[serde(default)]
    range: Option<(f64, f64)>,
    #[serde(default)]
    view: Option<String>,
    #[serde(default)]
    revision: Option<u64>,
}

async fn histogram(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult {
    let req: HistogramRequest = parse_body(&body)?;
    let d = s.dataset();
    let sel = selection_at(&s, req.revision)?;
    let mask = sel.mask(&d.table, req.view.as_deref())?;
    let spec = BinSpec {
        count: req.bins.unwrap_or(BinSpec::default().count),
        range: req.range,
    };
    let h = histogram1d(&d.table, &req.column, &spec, &mask)?;
    Ok(json_response(json!({ "revision": sel.revision, "filtered": mask.count_ones(), "histogram": h })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HeatmapRequest {
    x: String,
    y: String,
    #[serde(default = "default_heat")]
    nx: usize,
    #[serde(default = "default_heat")]
    ny: usize,
    #[serde(default)]
    view: Option<String>,
    #[serde(default)]
    revision: Option<u64>,
}

fn default_heat() -> usize {
    32
}

async fn heatmap(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult {
    let req: HeatmapRequest = parse_body(&body)?;
    let d = s.dataset();
    let sel = selection_at(&s, req.revision)?;
    let mask = sel.mask(&d.table, req.view.as_deref())?;
    let h = heatmap2d(&d.table, &req.x, &req.y, req.nx, req.ny, &mask)?;
    Ok(json_response(json!({ "revision": sel.revision, "filtered": mask.count_ones(), "heatmap": h })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxplotRequest {
    value: String,
    #[serde(default)]
    group: Option<String>,
    #[serde(default)]
    view: Option<String>,
    #[serde(default)]
    revision: Option<u64>,
}

async fn boxplot_query(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult {
    let req: BoxplotRequest = parse_body(&body)?;
    let d = s.dataset();
    let sel = selection_at(&s, req.revision)?;
    let mask = sel.mask(&d.table, req.view.as_deref())?;
    let groups = boxplot(&d.table, &req.value, req.group.as_deref(), &mask)?;
    Ok(json_response(json!({ "revision": sel.revision, "filtered": mask.count_ones(), "groups": groups })))
}

fn selection_json(sel: &Selection) -> Value {
    json!({ "revision": sel.revision, "entries": sel.context.entries() })
}

async fn get_selection(State(s): State<Arc<Session>>) -> Response {
    json_response(selection_json(&s.selection()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionRequest {
    view: String,
    /// `null` clears the view's entry.
    predicate: Option<Predicate>,
    #[serde(default)]
    expected_revision: Option<u64>,
}

async fn post_selection(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult {
    let req: SelectionRequest = parse_body(&body)?;
    match s.set_selection(&req.view, req.predicate, req.expected_revision) {
        Ok(sel) => Ok(json_response(selection_json(&sel))),
        Err(WriteError::Invalid(e)) => Err(e.into()),
        Err(WriteError::Stale { current }) => Err(ApiError::Conflict {
            expected: req.expected_revision.unwrap_or(current),
            current,
        }),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityRequest {
    #[serde(default)]
    extent: Option<Extent>,
    #[serde(default)]
    nx: Option<usize>,
    #[serde(default)]
    ny: Option<usize>,
    /// Kernel σ in grid cells.
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    view: Option<String>,
    #[serde(default)]
    revision: Option<u64>,
}

fn tile_size(v: Option<usize>) -> ApiResult<usize> {
    let n = v.unwrap_or(DEFAULT_TILE_SIZE);
    if n == 0 || n > MAX_TILE_SIZE {
        return Err(bad(format!("tile size must be in 1..={MAX_TILE_SIZE}, got {n}")));
    }
    Ok(n)
}

async fn density(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult {
    let req: DensityRequest = parse_body(&body)?;
    let (nx, ny) = (tile_size(req.nx)?, tile_size(req.ny)?);
    let d = s.dataset();
    let sel = selection_at(&s, req.revision)?;
    let mask = sel.mask(&d.table, req.view.as_deref())?;
    let extent = req.extent.unwrap_or(d.artifacts.extent);
    let sigma = req.sigma.unwrap_or(DEFAULT_TILE_SIGMA);
    let field = kde(&d.points, Some(&mask), extent, nx, ny, sigma)?;
    Ok(binary(
        encode_tile(&field),
        "application/octet-stream",
        &[(REVISION_HEADER, sel.revision.to_string())],
    ))
}

fn param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<T>> {
    match q.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| bad(format!("query parameter {key}={v:?} is not valid"))),
    }
}

fn level_of(d: &Dataset, level: Option<usize>) -> ApiResult<Option<usize>> {
    match level {
        Some(l) if l >= d.artifacts.clusters.levels.len() => Err(Error::NotFound(format!("cluster level {l}")).into()),
        other => Ok(other),
    }
}

async fn clusters(State(s): State<Arc<Session>>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let d = s.dataset();
    let levels = &d.artifacts.clusters.levels;
    let body = match level_of(&d, param(&q, "level")?)? {
        Some(l) => json!({ "level": l, "bandwidth": levels[l].bandwidth, "clusters": levels[l].clusters }),
        None => {
            let all: Vec<Value> = levels
                .iter()
                .enumerate()
                .map(|(i, l)| json!({ "level": i, "bandwidth": l.bandwidth, "clusters": l.clusters }))
                .collect();
            json!({ "levels": all })
        }
    };
    Ok(json_response(body))
}

fn plan_labels(plan: &LabelPlan, zoom: f64) -> Vec<Value> {
    plan.shown_at(zoom)
        .map(|i| {
            let l = &plan.labels[i];
            json!({
                "index": i,
                "text": l.candidate.text,
                "anchor": l.candidate.anchor,
                "width": l.candidate.width,
                "height": l.candidate.height,
                "priority": l.candidate.priority,
                "min_zoom": l.min_zoom,
            })
        })
        .collect()
}

async fn labels(State(s): State<Arc<Session>>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let d = s.dataset();
    let zoom: f64 = param(&q, "zoom")?.ok_or_else(|| bad("missing query parameter zoom"))?;
    if !(zoom > 0.0 && zoom.is_finite()) {
        return Err(bad(format!("zoom must be positive, got {zoom}")));
    }
    let layers = &d.artifacts.labels;
    if layers.levels.is_empty() {
        return Ok(json_response(json!({ "zoom": zoom, "level": null, "labels": [] })));
    }
    let level = match level_of(&d, param(&q, "level")?)? {
        Some(l) => l,
        None => layers.active_level(zoom),
    };
    let plan = &layers.levels[level];
    Ok(json_response(json!({
        "zoom": plan.clamp_zoom(zoom),
        "level": level,
        "labels": plan_labels(plan, zoom),
    })))
}

fn neighbors_json(n: &[Neighbor]) -> Value {
    json!({ "neighbors": n.iter().map(|n| json!({ "id": n.id, "distance": n.distance })).collect::<Vec<_>>() })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Knn2dRequest {
    Point {
        x: f64,
        y: f64,
        #[serde(default)]
        k: Option<usize>,
    },
    Pick {
        screen: [f64; 2],
        viewport: Viewport,
        radius_px: f64,
    },
}

async fn knn2d(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult {
    let req: Knn2dRequest = parse_body(&body)?;
    let d = s.dataset();
    match req {
        Knn2dRequest::Point { x, y, k } => {
            if !(x.is_finite() && y.is_finite()) {
                return Err(bad("query point must be finite"));
            }
            Ok(json_response(neighbors_json(&d.spatial.knn([x, y], k.unwrap_or(DEFAULT_KNN)))))
        }
        Knn2dRequest::Pick {
            screen,
            viewport,
            radius_px,
        } => {
            viewport.validate()?;
            if !(radius_px >= 0.0 && radius_px.is_finite()) {
                return Err(bad("radius_px must be a finite non-negative number"));
            }
            Ok(json_response(json!({ "pick": d.spatial.pick(screen, radius_px, &viewport) })))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KnnVecRequest {
    #[serde(default)]
    row: Option<u32>,
    #[serde(default)]
    vector: Option<Vec<f32>>,
    #[serde(default)]
    k: Option<usize>,
}

async fn knnvec(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult {
    let req: KnnVecRequest = parse_body(&body)?;
    let d = s.dataset();
    let index = d
        .vectors
        .as_ref()
        .ok_or_else(|| Error::NotFound("dataset has no vector column".into()))?;
    let k = req.k.unwrap_or(DEFAULT_KNN);
    let n = match (req.row, req.vector) {
        (Some(row), None) => {
            if row as usize >= d.table.row_count() {
                return Err(Error::NotFound(format!("row {row}")).into());
            }
            index.knn_row(row, k)?
        }
        (None, Some(v)) => index.knn_vector(&v, k)?,
        _ => return Err(bad("give exactly one of row or vector")),
    };
    Ok(json_response(neighbors_json(&n)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchRequest {
    query: String,
    #[serde(default)]
    column: Option<String>,
    #[serde(default)]
    limit: Option<usize>,
}

async fn search(State(s): State<Arc<Session>>, body: Bytes) -> ApiResult {
    let req: SearchRequest = parse_body(&body)?;
    let d = s.dataset();
    let column = req
        .column
        .or_else(|| d.spec.text.clone())
        .ok_or_else(|| bad("no text column configured; pass column"))?;
    let rows = text_search(&d.table, &column, &req.query, req.limit.unwrap_or(DEFAULT_SEARCH_LIMIT))?;
    Ok(json_response(json!({ "column": column, "rows": rows })))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointWindow {
    pub total: usize,
    pub stride: usize,
}

/// Packs matching rows inside the box as little-endian records, keeping every
/// `stride`-th match in row order so at most `limit` are returned.
pub fn pack_points(d: &Dataset, mask: &atlas_core::query::Bitmask, bounds: [f64; 4], limit: usize) -> (Vec<u8>, PointWindow) {
    let [x0, x1, y0, y1] = bounds;
    let matching: Vec<usize> = mask
        .iter_ones()
        .filter(|&i| {
            let [x, y] = d.points[i];
            x >= x0 && x <= x1 && y >= y0 && y <= y1
        })
        .collect();
    let total = matching.len();
    let stride = if limit == 0 { total.max(1) } else { total.div_ceil(limit).max(1) };
    let mut out = Vec::with_capacity(total.div_ceil(stride) * POINT_RECORD_LEN);
    if limit > 0 {
        for &i in matching.iter().step_by(stride) {
            let [x, y] = d.points[i];
            out.extend_from_slice(&(i as u32).to_le_bytes());
            out.extend_from_slice(&(x as f32).to_le_bytes());
            out.extend_from_slice(&(y as f32).to_le_bytes());
            out.extend_from_slice(&d.category_of(i).to_le_bytes());
        }
    }
    (out, PointWindow { total, stride })
}

async fn points(State(s): State<Arc<Session>>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let d = s.dataset();
    let sel = selection_at(&s, param(&q, "revision")?)?;
    let view: Option<String> = param(&q, "view")?;
    let mask = sel.mask(&d.table, view.as_deref())?;
    let bounds = [
        param(&q, "minx")?.unwrap_or(f64::NEG_INFINITY),
        param(&q, "maxx")?.unwrap_or(f64::INFINITY),
        param(&q, "miny")?.unwrap_or(f64::NEG_INFINITY),
        param(&q, "maxy")?.unwrap_or(f64::INFINITY),
    ];
    if bounds.iter().any(|v| v.is_nan()) {
        return Err(bad("point bounds must not be NaN"));
    }
    let limit = param(&q, "limit")?.unwrap_or(DEFAULT_POINT_LIMIT);
    let (bytes, w) = pack_points(&d, &mask, bounds, limit);
    Ok(binary(
        bytes,
        "application/octet-stream",
        &[
            (REVISION_HEADER, sel.revision.to_string()),
            (TOTAL_HEADER, w.total.to_string()),
            (STRIDE_HEADER, w.stride.to_string()),
        ],
    ))
}

async fn export_rows(State(s): State<Arc<Session>>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let d = s.dataset();
    let sel = selection_at(&s, param(&q, "revision")?)?;
    let format: ExportFormat = param(&q, "format")?.unwrap_or(ExportFormat::Csv);
    let view: Option<String> = param(&q, "view")?;
    let mask = sel.mask(&d.table, view.as_deref())?;
    let bytes = export(&d.table, &mask, format)?;
    let content_type = match format {
        ExportFormat::Csv => "text/csv",
        ExportFormat::Parquet => "application/vnd.apache.parquet",
    };
    Ok(binary(
        bytes,
        content_type,
        &[(REVISION_HEADER, sel.revision.to_string()), (ROWS_HEADER, mask.count_ones().to_string())],
    ))
}

async fn updates(State(s): State<Arc<Session>>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| push_revisions(socket, s))
}

async fn push_revisions(mut socket: WebSocket, session: Arc<Session>) {
    // subscribe before reading the current value so no change is missed
    let mut rx = session.subscribe();
    let mut last = session.revision();
    if send_revision(&mut socket, last).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(r) if r > last => {
                    last = r;
                    if send_revision(&mut socket, r).await.is_err() {
                        return;
                    }
                }
                Ok(_) => {}
                Err(RecvError::Lagged(_)) => {
                    let r = session.revision();
                    if r > last {
                        last = r;
                        if send_revision(&mut socket, r).await.is_err() {
                            return;
                        }
                    }
                }
                Err(RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

async fn send_revision(socket: &mut WebSocket, revision: u64) -> Result<(), axum::Error> {
    socket
        .send(Message::Text(json!({ "revision": revision }).to_string().into()))
        .await
}
