use atlas_core::render::{TileCache, WorldConfig};
use atlas_core::service::{router, AppState};
use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use std::time::Duration;
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(WorldConfig::default(), None))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, body)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post_json(app: &Router, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::post(uri).header(header::CONTENT_TYPE, "application/json").body(Body::from(body.to_string())).unwrap();
    let (s, _, b) = send(app, req).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn wait_job(app: &Router, id: &str) -> Value {
    for _ in 0..600 {
        let (s, _, b) = get(app, &format!("/analyze/{id}")).await;
        assert_eq!(s, StatusCode::OK);
        let v: Value = serde_json::from_slice(&b).unwrap();
        if v["status"] != "pending" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(200)).await;
    }
    panic!("job {id} did not finish");
}

#[tokio::test(flavor = "multi_thread")]
async fn tiles_are_deterministic_png_with_stable_etags() {
    let app = app();
    let uri = "/tiles/newton/param/1/0/0?tier=preview";
    let (s, h, a) = get(&app, uri).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(h[header::CONTENT_TYPE], "image/png");
    assert_eq!(&a[1..4], b"PNG");
    let etag = h[header::ETAG].to_str().unwrap().to_string();
    let (_, h2, b) = get(&app, uri).await;
    assert_eq!(a, b);
    assert_eq!(h2[header::ETAG].to_str().unwrap(), etag);

    let req = Request::get(uri).header(header::IF_NONE_MATCH, &etag).body(Body::empty()).unwrap();
    let (s, _, body) = send(&app, req).await;
    assert_eq!(s, StatusCode::NOT_MODIFIED);
    assert!(body.is_empty());
}

#[tokio::test(flavor = "multi_thread")]
async fn tile_errors_map_to_status_codes() {
    let app = app();
    assert_eq!(get(&app, "/tiles/newton/param/99/0/0").await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(get(&app, "/tiles/newton/param/1/5/0").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/tiles/newton/param/x/0/0").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/tiles/cubic/param/0/0/0").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/tiles/newton/side/0/0/0").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/tiles/newton/dyn/0/0/0").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/tiles/newton/dyn/0/0/0?anchor=2,0").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/tiles/newton/param/0/0/0?tier=fast").await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread")]
async fn dynamical_tile_renders_for_an_anchor_in_the_domain() {
    let (s, _, b) = get(&app(), "/tiles/newton/dyn/2/1/1?anchor=0,2&tier=preview").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(&b[1..4], b"PNG");
}

#[tokio::test(flavor = "multi_thread")]
async fn cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let cached = router(AppState::new(WorldConfig::default(), Some(TileCache::open(dir.path()).unwrap())));
    let uri = "/tiles/antipodal/param/2/1/2?tier=preview";
    let (_, h, plain) = get(&app(), uri).await;
    let (_, h1, first) = get(&cached, uri).await;
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    let (_, _, second) = get(&cached, uri).await;
    assert_eq!(plain, first);
    assert_eq!(first, second);
    assert_eq!(h[header::ETAG], h1[header::ETAG]);
}

#[tokio::test(flavor = "multi_thread")]
async fn classify_endpoint() {
    let app = app();
    let (s, _, b) = get(&app, "/classify?param=0,4.63343045134138").await;
    assert_eq!(s, StatusCode::OK);
    let v: Value = serde_json::from_slice(&b).unwrap();
    assert_eq!(v["verdict"], "Tricorn(4)");
    assert_eq!(v["period"], 4);
    assert_eq!(v["region"], "InU");

    let (_, _, b) = get(&app, "/classify?param=2,0").await;
    let v: Value = serde_json::from_slice(&b).unwrap();
    assert_eq!(v["verdict"], "OutsideDomain");

    let (_, _, b) = get(&app, "/classify?family=antipodal&param=0.01,0&tier=preview").await;
    let v: Value = serde_json::from_slice(&b).unwrap();
    assert_eq!(v["verdict"], "Principal");

    assert_eq!(get(&app, "/classify").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/classify?param=abc").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/classify?param=0,2&family=cubic").await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread")]
async fn visibility_job_finds_one_invisible_coroot() {
    let app = app();
    let (s, v) = post_json(&app, "/analyze", r#"{"kind":"visibility","family":"newton","param":"0,4.63343045134138"}"#).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    assert_eq!(v["status"], "pending");
    let done = wait_job(&app, v["id"].as_str().unwrap()).await;
    assert_eq!(done["status"], "done", "{done}");
    let entries = done["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    let invisible = entries.iter().filter(|e| e["verdict"]["state"] == "Invisible").count();
    assert_eq!(invisible, 1);
}

#[tokio::test(flavor = "multi_thread")]
async fn arc_trace_job_reports_requested_heights() {
    let app = app();
    let body = r#"{"kind":"arc-trace","family":"newton","center":"0,4.63343045134138","direction":"0.5,0.8660254037844386","period":4,"targets":[-0.5,0,0.5]}"#;
    let (s, v) = post_json(&app, "/analyze", body).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let done = wait_job(&app, v["id"].as_str().unwrap()).await;
    assert_eq!(done["status"], "done", "{done}");
    let samples = done["result"]["trace"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 3);
    for (s, h) in samples.iter().zip([-0.5, 0.0, 0.5]) {
        assert!((s["h"].as_f64().unwrap() - h).abs() < 1e-8);
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn failing_job_reports_its_error() {
    let app = app();
    let (s, v) = post_json(&app, "/analyze", r#"{"kind":"visibility","family":"newton","param":"0,2"}"#).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let done = wait_job(&app, v["id"].as_str().unwrap()).await;
    assert_eq!(done["status"], "failed");
    assert!(done["error"].as_str().is_some());
}

#[tokio::test(flavor = "multi_thread")]
async fn analyze_rejects_bad_bodies_and_unknown_jobs() {
    let app = app();
    for body in ["{", r#"{"kind":"nope"}"#, r#"{"kind":"visibility","family":"newton","param":"0,2","extra":1}"#, r#"{"kind":"visibility","family":"newton","param":"x"}"#] {
        assert_eq!(post_json(&app, "/analyze", body).await.0, StatusCode::BAD_REQUEST, "{body}");
    }
    assert_eq!(get(&app, "/analyze/job-999").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn classify_matches_the_command_line() {
    let app = app();
    for i in 0..20 {
        let param = format!("{},{}", -1.0 + 0.1 * i as f64, 1.2 + 0.17 * i as f64);
        let (_, _, b) = get(&app, &format!("/classify?param={param}&tier=preview")).await;
        let http: Value = serde_json::from_slice(&b).unwrap();
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_atlas"))
            .args(["classify", "--param", &param, "--tier", "preview"])
            .output()
            .unwrap();
        assert!(out.status.success());
        let cli: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(http, cli, "{param}");
    }
}
