use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use segment_forge_cli::server::{router, VERSION_HEADER};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes, _) = call_raw(method, uri, body.map(|b| b.to_string())).await;
    (status, serde_json::from_slice(&bytes).expect("json body"))
}

async fn call_raw(method: &str, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let res = router().oneshot(req).await.unwrap();
    let status = res.status();
    let version = res
        .headers()
        .get(VERSION_HEADER)
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes, version)
}

async fn compile(expr: &str) -> Value {
    let (status, body) = call("POST", "/compile", Some(json!({ "expr": expr }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body
}

#[tokio::test]
async fn health() {
    let (status, body) = call("GET", "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"version": 1, "status": "ok"}));
}

#[tokio::test]
async fn compile_returns_expanded_program() {
    let p = compile("x^2").await;
    assert_eq!(p["version"], 1);
    assert_eq!(p["output"], "Yp");
    assert!(p["steps"]
        .as_array()
        .unwrap()
        .iter()
        .all(|s| ["given", "line", "circle", "meet_ll", "meet_lc", "meet_cc"].contains(&s["kind"].as_str().unwrap())));

    let (_, raw) = call("POST", "/compile", Some(json!({"expr": "x^2", "opts": {"expand": false}}))).await;
    assert!(raw["steps"].as_array().unwrap().len() < p["steps"].as_array().unwrap().len());
}

#[tokio::test]
async fn compile_errors_are_stage_labeled() {
    let (status, body) = call("POST", "/compile", Some(json!({"expr": "x^^2"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["version"], 1);
    assert_eq!(body["error"]["stage"], "parse");
    assert_eq!(body["error"]["offset"], 2);

    let (status, body) = call("POST", "/compile", Some(json!({"expr": "x", "opts": {"layout": "nope"}}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["stage"], "request");

    let (status, body, version) = call_raw("POST", "/compile", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(version, "1");
    let body: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(body["error"]["stage"], "request");
}

#[tokio::test]
async fn interpret_exact_and_float() {
    let p = compile("x^2").await;
    let (status, body) = call(
        "POST",
        "/interpret",
        Some(json!({"program": p, "x": "3/2", "backend": "exact"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["version"], 1);
    assert_eq!(body["output"]["exact"], "9/4");
    assert_eq!(body["output"]["float"], 2.25);
    assert_eq!(body["figure"]["output_id"], "Yp");

    let (_, body) = call("POST", "/interpret", Some(json!({"program": p, "x": 3}))).await;
    assert!((body["output"]["float"].as_f64().unwrap() - 9.0).abs() < 1e-9);
    assert!(body["output"].get("exact").is_none());
}

#[tokio::test]
async fn reciprocal_at_zero_is_division_degenerate() {
    let p = compile("1/x").await;
    let (status, body) = call("POST", "/interpret", Some(json!({"program": p, "x": "0"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["version"], 1);
    assert_eq!(body["error"]["kind"], "division_degenerate");
    assert!(body["error"]["step"].as_str().unwrap().starts_with("div#"));
}

#[tokio::test]
async fn negative_transfer_is_semantic() {
    let p = compile("1 - x").await;
    let (status, body) = call("POST", "/interpret", Some(json!({"program": p, "x": "2", "backend": "exact"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["kind"], "negative_transfer");
}

#[tokio::test]
async fn interpret_schema_and_env_errors() {
    let (status, body) = call("POST", "/interpret", Some(json!({"program": {"version": 2}, "x": "1"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["stage"], "schema");
    assert_eq!(body["error"]["pointer"], "/program/version");

    let p = compile("a*x").await;
    let (status, body) = call("POST", "/interpret", Some(json!({"program": p, "x": "2", "env": {"a": "1/2"}, "backend": "exact"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["output"]["exact"], "1/1");
    let (status, _) = call("POST", "/interpret", Some(json!({"program": p, "x": "2", "env": {"b": "1"}}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call("POST", "/interpret", Some(json!({"program": p, "x": "two"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn trace_reciprocal_records_the_break() {
    let p = compile("1/x").await;
    let (status, body) = call(
        "POST",
        "/trace",
        Some(json!({"program": p, "range": ["0", "4"], "samples": 101})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["version"], 1);
    assert_eq!(body["branches"].as_array().unwrap().len(), 1);
    assert_eq!(body["breaks"].as_array().unwrap().len(), 1);
    assert_eq!(body["breaks"][0]["reason"]["error_kind"], "division_degenerate");
    for p in body["branches"][0].as_array().unwrap() {
        let (x, y) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
        assert!((x * y - 1.0).abs() < 1e-9);
    }
}

#[tokio::test]
async fn trace_svg_and_errors() {
    let p = compile("sqrt(x)").await;
    let (status, bytes, version) = call_raw(
        "POST",
        "/trace",
        Some(json!({"program": p, "range": [0, 4], "samples": 41, "opts": {"format": "svg"}}).to_string()),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(version, "1");
    assert!(String::from_utf8(bytes).unwrap().starts_with("<svg"));

    let (status, body) = call("POST", "/trace", Some(json!({"program": p, "range": ["3", "1"]}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["stage"], "trace");
    let (status, _) = call("POST", "/trace", Some(json!({"program": p, "range": [0, 1], "samples": 1_000_000}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn identical_requests_identical_responses() {
    let p = compile("x^3 + x").await;
    let req = json!({"program": p, "range": ["0", "2"], "samples": 51}).to_string();
    let a = call_raw("POST", "/trace", Some(req.clone())).await;
    let b = call_raw("POST", "/trace", Some(req)).await;
    assert_eq!(a, b);
    assert_eq!(compile("x^3 + x").await, p);
}
