//! HTTP facade: tiles, point queries and asynchronous analyses.

use crate::error::AtlasError;
use crate::family::{parse_complex, Family, Parameter};
use crate::orbit::Tier;
use crate::records::{classify_query, AnalysisRecord, AnalysisRequest};
use crate::render::{render_tile, tile_etag, Plane, TileCache, TileKey, WorldConfig};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use tokio::sync::Semaphore;

pub const DEFAULT_MAX_JOBS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum JobState {
    Pending,
    Done { result: Box<AnalysisRecord> },
    Failed { error: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct JobDocument {
    pub id: String,
    #[serde(flatten)]
    pub state: JobState,
}

/// In-process job table. Jobs beyond the concurrency bound wait in FIFO order on the semaphore.
pub struct JobRegistry {
    jobs: Mutex<HashMap<String, JobState>>,
    next: AtomicU64,
    slots: Arc<Semaphore>,
}

impl JobRegistry {
    pub fn new(max_jobs: usize) -> Self {
        JobRegistry { jobs: Mutex::new(HashMap::new()), next: AtomicU64::new(1), slots: Arc::new(Semaphore::new(max_jobs.max(1))) }
    }

    pub fn get(&self, id: &str) -> Option<JobState> {
        self.jobs.lock().unwrap().get(id).cloned()
    }

    fn set(&self, id: &str, s: JobState) {
        self.jobs.lock().unwrap().insert(id.to_string(), s);
    }

    pub fn submit(self: &Arc<Self>, req: AnalysisRequest) -> String {
        let id = format!("job-{}", self.next.fetch_add(1, Ordering::Relaxed));
        self.set(&id, JobState::Pending);
        let reg = Arc::clone(self);
        let job = id.clone();
        tokio::spawn(async move {
            let _permit = reg.slots.clone().acquire_owned().await.expect("semaphore is never closed");
            let out = tokio::task::spawn_blocking(move || req.run()).await;
            let state = match out {
                Ok(Ok(result)) => JobState::Done { result: Box::new(result) },
                Ok(Err(e)) => JobState::Failed { error: e.to_string() },
                Err(e) => JobState::Failed { error: format!("job panicked: {e}") },
            };
            reg.set(&job, state);
        });
        id
    }
}

#[derive(Clone)]
pub struct AppState {
    pub world: WorldConfig,
    pub cache: Option<Arc<TileCache>>,
    pub jobs: Arc<JobRegistry>,
}

impl AppState {
    pub fn new(world: WorldConfig, cache: Option<TileCache>) -> Self {
        AppState { world, cache: cache.map(Arc::new), jobs: Arc::new(JobRegistry::new(DEFAULT_MAX_JOBS)) }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/tiles/{family}/{plane}/{zoom}/{x}/{y}", get(tile))
        .route("/classify", get(classify))
        .route("/analyze", post(analyze))
        .route("/analyze/{id}", get(job))
        .with_state(state)
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: msg.into() })).into_response()
}

fn bad_request(e: impl ToString) -> Response {
    error(StatusCode::BAD_REQUEST, e.to_string())
}

/// Parses the tile path and query into a key; the error carries the status to answer with.
pub fn parse_tile_key(
    parts: (String, String, String, String, String),
    q: &HashMap<String, String>,
    world: &WorldConfig,
) -> std::result::Result<TileKey, (StatusCode, String)> {
    let bad = |m: String| (StatusCode::BAD_REQUEST, m);
    let (family, plane, zoom, x, y) = parts;
    let family: Family = family.parse().map_err(|e: AtlasError| bad(e.to_string()))?;
    let zoom: u32 = zoom.parse().map_err(|_| bad(format!("bad zoom '{zoom}'")))?;
    let x: u64 = x.parse().map_err(|_| bad(format!("bad x '{x}'")))?;
    let y: u64 = y.parse().map_err(|_| bad(format!("bad y '{y}'")))?;
    let tier: Tier = match q.get("tier") {
        Some(t) => t.parse().map_err(|e: AtlasError| bad(e.to_string()))?,
        None => Tier::Standard,
    };
    let plane = match (plane.as_str(), q.get("anchor")) {
        ("param", None) => Plane::Parameter,
        ("param", Some(_)) => return Err(bad("anchor is only valid on dyn tiles".into())),
        ("dyn", Some(a)) => Plane::Dynamical { anchor: parse_complex(a).map_err(|e| bad(e.to_string()))? },
        ("dyn", None) => return Err(bad("dyn tiles need an anchor".into())),
        (p, _) => return Err(bad(format!("unknown plane '{p}'"))),
    };
    if zoom > world.max_zoom {
        return Err((StatusCode::UNPROCESSABLE_ENTITY, format!("zoom {zoom} beyond max {}", world.max_zoom)));
    }
    let key = TileKey { family, plane, zoom, x, y, tier };
    key.viewport(world).map_err(|e| (StatusCode::NOT_FOUND, e.to_string()))?;
    if let Plane::Dynamical { anchor } = plane {
        Parameter::new(family, anchor).require_domain().map_err(|e| bad(e.to_string()))?;
    }
    Ok(key)
}

async fn tile(
    State(st): State<AppState>,
    Path(parts): Path<(String, String, String, String, String)>,
    Query(q): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Response {
    let key = match parse_tile_key(parts, &q, &st.world) {
        Ok(k) => k,
        Err((status, msg)) => return error(status, msg),
    };
    let etag = tile_etag(&key, &st.world);
    if headers.get(header::IF_NONE_MATCH).and_then(|v| v.to_str().ok()) == Some(etag.as_str()) {
        return (StatusCode::NOT_MODIFIED, [(header::ETAG, etag)]).into_response();
    }
    let name = etag.trim_matches('"').to_string();
    let cached = st.cache.as_ref().and_then(|c| c.get(&name));
    let bytes = match cached {
        Some(b) => b,
        None => {
            let world = st.world;
            let out = tokio::task::spawn_blocking(move || render_tile(&key, &world).and_then(|r| r.png())).await;
            let bytes = match out {
                Ok(Ok(b)) => b,
                Ok(Err(AtlasError::OutOfWorld(m))) => return error(StatusCode::NOT_FOUND, m),
                Ok(Err(e)) => return bad_request(e),
                Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
            };
            if let Some(c) = &st.cache {
                // a failed cache write only costs a re-render later
                let _ = c.put(&name, &bytes);
            }
            bytes
        }
    };
    ([(header::CONTENT_TYPE, "image/png".to_string()), (header::ETAG, etag)], Bytes::from(bytes)).into_response()
}

async fn classify(Query(q): Query<HashMap<String, String>>) -> Response {
    let family: Family = match q.get("family").map(|f| f.parse()) {
        Some(Ok(f)) => f,
        Some(Err(e)) => return bad_request(e),
        None => Family::NewtonQuartic,
    };
    let tier: Tier = match q.get("tier").map(|t| t.parse()) {
        Some(Ok(t)) => t,
        Some(Err(e)) => return bad_request(e),
        None => Tier::Standard,
    };
    let Some(raw) = q.get("param") else { return bad_request("missing param") };
    let value = match parse_complex(raw) {
        Ok(v) => v,
        Err(e) => return bad_request(e),
    };
    let param = Parameter::new(family, value);
    match tokio::task::spawn_blocking(move || classify_query(&param, tier)).await {
        Ok(Ok(doc)) => Json(doc).into_response(),
        Ok(Err(e)) => bad_request(e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn analyze(State(st): State<AppState>, body: Bytes) -> Response {
    let req: AnalysisRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return bad_request(format!("invalid body: {e}")),
    };
    if let Err(e) = req.validate() {
        return bad_request(e);
    }
    let id = st.jobs.submit(req);
    (StatusCode::ACCEPTED, Json(JobDocument { id, state: JobState::Pending })).into_response()
}

async fn job(State(st): State<AppState>, Path(id): Path<String>) -> Response {
    match st.jobs.get(&id) {
        Some(state) => Json(JobDocument { id, state }).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown job '{id}'")),
    }
}

/// Serves until the process is stopped.
pub async fn serve(addr: std::net::SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
