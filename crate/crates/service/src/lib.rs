//! Stateless HTTP facade over the decision engine.
//!
//! Every response body is an envelope: `{"ok":true,"result":...}` or
//! `{"ok":false,"error":{"code","message","path"}}`. The `result` text is the
//! same canonical JSON the CLI prints for the same request.

use std::net::{IpAddr, SocketAddr};

use axum::body::Bytes;
use axum::extract::DefaultBodyLimit;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use log::{debug, info};
use serde::Deserialize;
use serde_json::json;
use slb_core::deal::ensure_valid;
use slb_core::scenario::{from_json_text, parse_scenario, to_canonical_json, ReportDocument, Scenario, SCHEMA_VERSION};
use slb_core::sensitivity::{self, linspace, Variable, DEFAULT_PERTURBATION};
use slb_core::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};

/// Largest sweep grid accepted.
pub const MAX_SWEEP_POINTS: usize = 10_001;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: IpAddr,
    pub port: u16,
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { bind: IpAddr::from([127, 0, 0, 1]), port: 8080, cors_origin: None }
    }
}

/// Current time as RFC 3339 with second precision.
pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn router(cors_origin: Option<&str>) -> Router {
    let app = Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/evaluate", post(evaluate))
        .route("/api/v1/breakeven", post(breakeven))
        .route("/api/v1/sweep", post(sweep))
        .route("/api/v1/tornado", post(tornado))
        .layer(DefaultBodyLimit::max(16 * 1024 * 1024));
    match cors_origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(origin) => app.layer(
            CorsLayer::new()
                .allow_origin(AllowOrigin::exact(origin))
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        ),
        None => app,
    }
}

pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let addr = SocketAddr::new(config.bind, config.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config.cors_origin.as_deref())).await
}

/// JSON body with its status code.
struct JsonText(StatusCode, String);

impl IntoResponse for JsonText {
    fn into_response(self) -> Response {
        (self.0, [(header::CONTENT_TYPE, "application/json")], self.1).into_response()
    }
}

fn ok(result_json: &str) -> JsonText {
    JsonText(StatusCode::OK, format!("{{\"ok\":true,\"result\":{}}}\n", result_json.trim_end()))
}

fn failure(status: StatusCode, code: &str, message: String, path: Option<String>, details: serde_json::Value) -> JsonText {
    let mut error = json!({ "code": code, "message": message, "path": path });
    if !details.is_null() {
        error["details"] = details;
    }
    JsonText(status, format!("{}\n", json!({ "ok": false, "error": error })))
}

fn error_response(e: Error) -> JsonText {
    let path = e.path();
    let (status, code, details) = match &e {
        Error::Syntax { line, column, .. } => {
            (StatusCode::BAD_REQUEST, "syntax", json!({ "line": line, "column": column }))
        }
        Error::Schema { .. } => (StatusCode::BAD_REQUEST, "schema", serde_json::Value::Null),
        Error::Validation(findings) => (StatusCode::BAD_REQUEST, "validation", json!({ "findings": findings })),
        Error::MissingCurve(_) => (StatusCode::BAD_REQUEST, "configuration", serde_json::Value::Null),
        Error::InvalidInput(_) => (StatusCode::BAD_REQUEST, "invalid_input", serde_json::Value::Null),
        Error::Bracket { lo, hi, g_lo, g_hi } => (
            StatusCode::UNPROCESSABLE_ENTITY,
            "bracket",
            json!({ "lo": lo, "hi": hi, "g_lo": g_lo, "g_hi": g_hi }),
        ),
        Error::NoConvergence { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "no_convergence", serde_json::Value::Null),
        Error::Domain(_) => (StatusCode::UNPROCESSABLE_ENTITY, "domain", serde_json::Value::Null),
        Error::Capability(_) => (StatusCode::UNPROCESSABLE_ENTITY, "capability", serde_json::Value::Null),
        Error::InvalidState(_) | Error::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", serde_json::Value::Null),
    };
    failure(status, code, e.to_string(), path, details)
}

fn body_text(body: &Bytes) -> Result<&str, JsonText> {
    std::str::from_utf8(body).map_err(|e| {
        failure(StatusCode::BAD_REQUEST, "syntax", format!("body is not UTF-8: {e}"), None, serde_json::Value::Null)
    })
}

async fn health() -> JsonText {
    JsonText(
        StatusCode::OK,
        format!("{}\n", json!({ "status": "ok", "version": slb_core::VERSION, "schema_version": SCHEMA_VERSION })),
    )
}

/// Report document for a scenario body, as the CLI `evaluate` command prints it.
pub fn evaluate_text(text: &str, generated_at: &str) -> Result<String, Error> {
    let scenario = parse_scenario(text)?;
    Ok(ReportDocument::build(scenario, generated_at)?.to_json())
}

async fn evaluate(body: Bytes) -> JsonText {
    let text = match body_text(&body) {
        Ok(t) => t,
        Err(e) => return e,
    };
    debug!("evaluate: {} bytes", text.len());
    match evaluate_text(text, &timestamp()) {
        Ok(json) => ok(&json),
        Err(e) => error_response(e),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakevenRequest {
    pub scenario: Scenario,
    pub variable: Variable,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub scenario: Scenario,
    pub variable: Variable,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TornadoRequest {
    pub scenario: Scenario,
    #[serde(default)]
    pub perturbation: Option<f64>,
}

fn checked(scenario: &Scenario) -> Result<(), Error> {
    if scenario.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema {
            path: "scenario.schema_version".into(),
            message: format!("unsupported schema version {:?}", scenario.schema_version),
        });
    }
    ensure_valid(&scenario.validate())
}

async fn breakeven(body: Bytes) -> JsonText {
    let run = || -> Result<String, Error> {
        let req: BreakevenRequest = from_json_text(body_text(&body).map_err(|_| Error::InvalidInput("body is not UTF-8".into()))?)?;
        checked(&req.scenario)?;
        Ok(to_canonical_json(&sensitivity::breakeven(&req.scenario, req.variable, req.lo, req.hi)?))
    };
    match run() {
        Ok(json) => ok(&json),
        Err(e) => error_response(e),
    }
}

/// Grid for a sweep request; `Err(n)` when it exceeds [`MAX_SWEEP_POINTS`].
fn sweep_grid(req: &SweepRequest) -> Result<Result<Vec<f64>, usize>, Error> {
    if let Some(grid) = &req.grid {
        return Ok(if grid.len() > MAX_SWEEP_POINTS { Err(grid.len()) } else { Ok(grid.clone()) });
    }
    match (req.from, req.to, req.steps) {
        (Some(from), Some(to), Some(steps)) => {
            Ok(if steps > MAX_SWEEP_POINTS { Err(steps) } else { Ok(linspace(from, to, steps)) })
        }
        _ => Err(Error::InvalidInput("sweep needs either `grid` or all of `from`, `to`, `steps`".into())),
    }
}

async fn sweep(body: Bytes) -> JsonText {
    let text = match body_text(&body) {
        Ok(t) => t,
        Err(e) => return e,
    };
    let req: SweepRequest = match from_json_text(text) {
        Ok(r) => r,
        Err(e) => return error_response(e),
    };
    if let Err(e) = checked(&req.scenario) {
        return error_response(e);
    }
    let grid = match sweep_grid(&req) {
        Ok(Ok(grid)) => grid,
        Ok(Err(n)) => {
            return failure(
                StatusCode::PAYLOAD_TOO_LARGE,
                "too_large",
                format!("sweep grid has {n} points; the limit is {MAX_SWEEP_POINTS}"),
                Some("grid".into()),
                serde_json::Value::Null,
            )
        }
        Err(e) => return error_response(e),
    };
    match sensitivity::sweep(&req.scenario, req.variable, &grid) {
        Ok(table) => ok(&to_canonical_json(&table)),
        Err(e) => error_response(e),
    }
}

async fn tornado(body: Bytes) -> JsonText {
    let run = || -> Result<String, Error> {
        let req: TornadoRequest = from_json_text(body_text(&body).map_err(|_| Error::InvalidInput("body is not UTF-8".into()))?)?;
        checked(&req.scenario)?;
        let rows = sensitivity::tornado(&req.scenario, req.perturbation.unwrap_or(DEFAULT_PERTURBATION))?;
        Ok(to_canonical_json(&rows))
    };
    match run() {
        Ok(json) => ok(&json),
        Err(e) => error_response(e),
    }
}
