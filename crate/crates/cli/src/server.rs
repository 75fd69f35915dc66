//! Stateless JSON service for the explorer.
//!
//! | route | body | success |
//! |---|---|---|
//! | `GET /health` | | `{version, status}` |
//! | `POST /compile` | `{expr, opts?}` | program JSON |
//! | `POST /interpret` | `{program, x, env?, backend?}` | `{version, backend, output, figure}` |
//! | `POST /trace` | `{program, range, samples?, env?, opts?}` | locus JSON or SVG |
//!
//! Malformed requests answer 400 with `{version, error: {stage, message, ..}}`;
//! constructions that fail at the given input answer 422 with
//! `{version, error: StepError}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use num_rational::BigRational;
use segment_forge::compile::{compile_source, CompileError};
use segment_forge::construct::expand;
use segment_forge::emit::{
    figure_to_value, locus_to_svg, locus_to_value, program_from_value, program_to_value, SvgStyle,
    SCHEMA_VERSION,
};
use segment_forge::expr::CoeffEnv;
use segment_forge::locus::{TraceOptions, DEFAULT_CLIP_Y, DEFAULT_SAMPLES};
use segment_forge::registry::Registry;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::shared::{env_for, output_value, rational, run_trace};

pub const VERSION_HEADER: &str = "x-segment-forge-version";
pub const MAX_TRACE_SAMPLES: usize = 20_000;

type Shared = Arc<Registry>;

pub fn router() -> Router {
    router_with(Arc::new(Registry::builtin()))
}

pub fn router_with(registry: Arc<Registry>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/compile", post(compile))
        .route("/interpret", post(interpret))
        .route("/trace", post(trace))
        .with_state(registry)
}

pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

struct Reply(StatusCode, Value);

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        let mut r = (self.0, Json(self.1)).into_response();
        r.headers_mut().insert(VERSION_HEADER, HeaderValue::from(SCHEMA_VERSION));
        r
    }
}

fn ok(body: Value) -> Reply {
    Reply(StatusCode::OK, body)
}

fn bad(stage: &str, message: impl Into<String>, extra: Map<String, Value>) -> Reply {
    let mut error = Map::new();
    error.insert("stage".into(), stage.into());
    error.insert("message".into(), message.into().into());
    error.extend(extra);
    Reply(
        StatusCode::BAD_REQUEST,
        json!({ "version": SCHEMA_VERSION, "error": error }),
    )
}

fn request_error(message: impl Into<String>) -> Reply {
    bad("request", message, Map::new())
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, Reply> {
    serde_json::from_slice(body).map_err(|e| request_error(format!("invalid request body: {e}")))
}

/// A rational given as a string (`"3/2"`, `"1.5"`) or an integer.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Rat {
    Text(String),
    Int(i64),
}

impl Rat {
    fn value(&self, what: &str) -> Result<BigRational, Reply> {
        match self {
            Rat::Text(t) => rational(t, what).map_err(request_error),
            Rat::Int(i) => Ok(BigRational::from_integer((*i).into())),
        }
    }
}

fn rational_map(m: &BTreeMap<String, Rat>, what: &str) -> Result<BTreeMap<String, BigRational>, Reply> {
    m.iter()
        .map(|(k, v)| Ok((k.clone(), v.value(&format!("{what}.{k}"))?)))
        .collect()
}

fn load_program(v: &Value) -> Result<segment_forge::construct::Program, Reply> {
    program_from_value(v).map_err(|e| {
        let mut extra = Map::new();
        extra.insert("pointer".into(), format!("/program{}", e.pointer).into());
        bad("schema", e.message, extra)
    })
}

async fn blocking(f: impl FnOnce() -> Reply + Send + 'static) -> Reply {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Reply(StatusCode::INTERNAL_SERVER_ERROR, json!({"version": SCHEMA_VERSION, "error": {"stage": "internal", "message": e.to_string()}})))
}

async fn health() -> Reply {
    ok(json!({ "version": SCHEMA_VERSION, "status": "ok" }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompileRequest {
    expr: String,
    #[serde(default)]
    opts: CompileRequestOpts,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompileRequestOpts {
    schedule: Option<String>,
    layout: Option<String>,
    share: Option<bool>,
    expand: Option<bool>,
    #[serde(default)]
    defaults: BTreeMap<String, Rat>,
}

async fn compile(State(registry): State<Shared>, body: Bytes) -> Reply {
    blocking(move || match compile_inner(&registry, &body) {
        Ok(r) | Err(r) => r,
    })
    .await
}

fn compile_inner(registry: &Registry, body: &Bytes) -> Result<Reply, Reply> {
    let req: CompileRequest = parse_body(body)?;
    let o = &req.opts;
    let mut opts = registry
        .compile_options(o.schedule.as_deref(), o.layout.as_deref(), o.share.unwrap_or(true))
        .map_err(|e| request_error(e.to_string()))?;
    let mut defaults = CoeffEnv::new();
    for (name, v) in rational_map(&o.defaults, "opts.defaults")? {
        defaults
            .insert(&name, v)
            .map_err(|e| request_error(e.to_string()))?;
    }
    opts.defaults = defaults;
    let program = compile_source(&req.expr, &opts).map_err(|e| {
        let mut extra = Map::new();
        if let CompileError::Parse(p) = &e {
            extra.insert("offset".into(), p.offset.into());
            extra.insert("expected".into(), p.expected.clone().into());
        }
        bad(e.stage(), e.to_string(), extra)
    })?;
    let program = if o.expand.unwrap_or(true) {
        expand(&program).map_err(|d| {
            bad(
                "compile",
                d.first().map(|d| d.to_string()).unwrap_or_default(),
                Map::new(),
            )
        })?
    } else {
        program
    };
    Ok(ok(program_to_value(&program)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpretRequest {
    program: Value,
    x: Rat,
    #[serde(default)]
    env: BTreeMap<String, Rat>,
    backend: Option<String>,
}

async fn interpret(State(registry): State<Shared>, body: Bytes) -> Reply {
    blocking(move || match interpret_inner(&registry, &body) {
        Ok(r) | Err(r) => r,
    })
    .await
}

fn interpret_inner(registry: &Registry, body: &Bytes) -> Result<Reply, Reply> {
    let req: InterpretRequest = parse_body(body)?;
    let backend = registry
        .backend(req.backend.as_deref().unwrap_or("f64"))
        .map_err(|e| request_error(e.to_string()))?;
    let program = load_program(&req.program)?;
    let x = req.x.value("x")?;
    let env = env_for(&program, &rational_map(&req.env, "env")?).map_err(request_error)?;
    match backend.interpret(&program, &x, &env) {
        Ok(fig) => Ok(ok(json!({
            "version": SCHEMA_VERSION,
            "backend": backend.name(),
            "output": output_value(&fig),
            "figure": figure_to_value(&fig.to_f64()),
        }))),
        Err(e) => Err(Reply(
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({ "version": SCHEMA_VERSION, "error": e }),
        )),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceRequest {
    program: Value,
    range: [Rat; 2],
    samples: Option<usize>,
    #[serde(default)]
    env: BTreeMap<String, Rat>,
    #[serde(default)]
    opts: TraceRequestOpts,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceRequestOpts {
    clip_y: Option<f64>,
    refine: Option<bool>,
    backend: Option<String>,
    #[serde(default)]
    inverse: bool,
    format: Option<String>,
}

async fn trace(State(registry): State<Shared>, body: Bytes) -> Response {
    let reply = tokio::task::spawn_blocking(move || trace_inner(&registry, &body)).await;
    match reply {
        Ok(Ok(TraceOut::Json(v))) => ok(v).into_response(),
        Ok(Ok(TraceOut::Svg(bytes))) => {
            let mut r = (StatusCode::OK, bytes).into_response();
            let h = r.headers_mut();
            h.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/svg+xml"));
            h.insert(VERSION_HEADER, HeaderValue::from(SCHEMA_VERSION));
            r
        }
        Ok(Err(r)) => r.into_response(),
        Err(e) => bad("internal", e.to_string(), Map::new()).into_response(),
    }
}

enum TraceOut {
    Json(Value),
    Svg(Vec<u8>),
}

fn trace_inner(registry: &Registry, body: &Bytes) -> Result<TraceOut, Reply> {
    let req: TraceRequest = parse_body(body)?;
    let o = &req.opts;
    let svg = match o.format.as_deref() {
        None | Some("json") => false,
        Some("svg") => true,
        Some(f) => return Err(request_error(format!("unknown format `{f}` (json, svg)"))),
    };
    let backend = registry
        .backend(o.backend.as_deref().unwrap_or("f64"))
        .map_err(|e| request_error(e.to_string()))?;
    let samples = req.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples > MAX_TRACE_SAMPLES {
        return Err(request_error(format!(
            "at most {MAX_TRACE_SAMPLES} samples per request, got {samples}"
        )));
    }
    let program = load_program(&req.program)?;
    let lo = req.range[0].value("range[0]")?;
    let hi = req.range[1].value("range[1]")?;
    let env = env_for(&program, &rational_map(&req.env, "env")?).map_err(request_error)?;
    let opts = TraceOptions {
        clip_y: o.clip_y.unwrap_or(DEFAULT_CLIP_Y),
        refine: o.refine.unwrap_or(true),
        backend: backend.clone(),
    };
    let locus = run_trace(&program, &env, (&lo, &hi), samples, &opts, o.inverse)
        .map_err(|e| bad("trace", e.to_string(), Map::new()))?;
    if svg {
        let fig = if o.inverse {
            None
        } else {
            backend.interpret(&program, &hi, &env).ok().map(|f| f.to_f64())
        };
        Ok(TraceOut::Svg(locus_to_svg(&locus, fig.as_ref(), &SvgStyle::default())))
    } else {
        Ok(TraceOut::Json(locus_to_value(&locus)))
    }
}
