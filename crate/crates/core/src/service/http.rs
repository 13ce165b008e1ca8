use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::hub::{AdvanceRequest, ConsensusQuery, CreateSession, Hub, JoinRequest, TelemetryPost};
use crate::error::CoosError;
use crate::pclm::{ParticipantId, Winner};
use crate::ternary::{Axis, BoundKind, CoordinateBound};

type Params = Path<BTreeMap<String, String>>;

struct ApiError(CoosError);

impl From<CoosError> for ApiError {
    fn from(e: CoosError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.0;
        let (status, code, detail) = match &e {
            CoosError::Domain(_) => (StatusCode::BAD_REQUEST, "domain_error", Value::Null),
            CoosError::Bracketing(_) => (StatusCode::BAD_REQUEST, "bracketing_error", Value::Null),
            CoosError::SweepTooLarge { size, cap } => (
                StatusCode::BAD_REQUEST,
                "sweep_too_large",
                json!({"size": size.to_string(), "cap": cap}),
            ),
            CoosError::Format(_) => (StatusCode::BAD_REQUEST, "format_error", Value::Null),
            CoosError::Json(_) => (StatusCode::BAD_REQUEST, "invalid_json", Value::Null),
            CoosError::NotFound { kind, id } => {
                (StatusCode::NOT_FOUND, "not_found", json!({"kind": kind, "id": id}))
            }
            CoosError::IllegalTransition { from, to } => (
                StatusCode::CONFLICT,
                "illegal_transition",
                json!({"current": from, "requested": to}),
            ),
            CoosError::Conflict(_) => (StatusCode::CONFLICT, "conflict", Value::Null),
            CoosError::Forbidden(_) => (StatusCode::FORBIDDEN, "forbidden", Value::Null),
            CoosError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "io_error", Value::Null),
        };
        let body = json!({"code": code, "message": e.to_string(), "detail": detail});
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError(CoosError::domain(format!("invalid request body: {e}"))))
}

fn param<T: std::str::FromStr>(params: &BTreeMap<String, String>, name: &str) -> ApiResult<T> {
    params
        .get(name)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| ApiError(CoosError::domain(format!("invalid path parameter {name}"))))
}

/// Runs blocking hub work off the async executor.
async fn blocking<T, F>(hub: Arc<Hub>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Hub) -> crate::Result<T> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&hub))
        .await
        .map_err(|e| ApiError(CoosError::Io(std::io::Error::other(e.to_string()))))?
        .map_err(ApiError)
}

fn ok<T: Serialize>(value: T) -> Response {
    Json(value).into_response()
}

fn created<T: Serialize>(value: T) -> Response {
    (StatusCode::CREATED, Json(value)).into_response()
}

async fn create_session(State(hub): State<Arc<Hub>>, bytes: Bytes) -> ApiResult<Response> {
    let req: CreateSession = body(&bytes)?;
    let id = blocking(hub, move |h| h.create_session(req)).await?;
    Ok(created(json!({"session_id": id})))
}

async fn get_session(State(hub): State<Arc<Hub>>, Path(p): Params) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    Ok(ok(blocking(hub, move |h| h.snapshot(id)).await?))
}

async fn get_events(State(hub): State<Arc<Hub>>, Path(p): Params) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    Ok(ok(blocking(hub, move |h| h.events(id)).await?))
}

async fn advance(State(hub): State<Arc<Hub>>, Path(p): Params, bytes: Bytes) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let req: AdvanceRequest = body(&bytes)?;
    Ok(ok(blocking(hub, move |h| h.advance(id, req)).await?))
}

async fn join(State(hub): State<Arc<Hub>>, Path(p): Params, bytes: Bytes) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let req: JoinRequest = body(&bytes)?;
    let pid = blocking(hub, move |h| h.join(id, req)).await?;
    Ok(created(json!({"participant_id": pid})))
}

async fn question(State(hub): State<Arc<Hub>>, Path(p): Params) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let pid: ParticipantId = param(&p, "pid")?;
    Ok(match blocking(hub, move |h| h.next_question(id, pid)).await? {
        Some(q) => ok(q),
        None => StatusCode::NO_CONTENT.into_response(),
    })
}

#[derive(Deserialize)]
struct AnswerBody {
    winner: Winner,
}

async fn answer(State(hub): State<Arc<Hub>>, Path(p): Params, bytes: Bytes) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let pid: ParticipantId = param(&p, "pid")?;
    let qid = param(&p, "qid")?;
    let req: AnswerBody = body(&bytes)?;
    Ok(ok(blocking(hub, move |h| h.answer(id, pid, qid, req.winner)).await?))
}

async fn preference(State(hub): State<Arc<Hub>>, Path(p): Params) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let pid: ParticipantId = param(&p, "pid")?;
    Ok(ok(blocking(hub, move |h| h.preference(id, pid)).await?))
}

async fn intent(State(hub): State<Arc<Hub>>, Path(p): Params) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    Ok(ok(blocking(hub, move |h| h.intent(id)).await?))
}

fn consensus_query(q: &BTreeMap<String, String>) -> ApiResult<ConsensusQuery> {
    let mut out = ConsensusQuery::default();
    for (k, v) in q {
        let bad = || ApiError(CoosError::domain(format!("invalid query parameter {k}={v}")));
        match k.as_str() {
            "size_weighted" => out.size_weighted = v.parse().map_err(|_| bad())?,
            "dims_total" => out.dims_total = v.parse().map_err(|_| bad())?,
            "dims_respected" => out.dims_respected = v.parse().map_err(|_| bad())?,
            _ => return Err(ApiError(CoosError::domain(format!("unknown query parameter {k}")))),
        }
    }
    Ok(out)
}

async fn consensus(
    State(hub): State<Arc<Hub>>,
    Path(p): Params,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let query = consensus_query(&q)?;
    Ok(ok(blocking(hub, move |h| h.consensus(id, query)).await?))
}

#[derive(Deserialize)]
struct ConstraintBody {
    axis: Axis,
    kind: BoundKind,
    value: f64,
}

async fn constraints(State(hub): State<Arc<Hub>>, Path(p): Params, bytes: Bytes) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let req: ConstraintBody = body(&bytes)?;
    let bound = CoordinateBound::new(req.axis, req.kind, req.value)?;
    let applied = blocking(hub, move |h| h.add_constraint(id, bound)).await?;
    Ok(ok(json!({"applied_constraints": applied})))
}

async fn telemetry(State(hub): State<Arc<Hub>>, bytes: Bytes) -> ApiResult<Response> {
    let req: TelemetryPost = body(&bytes)?;
    let accepted = blocking(hub, move |h| h.ingest_telemetry(req)).await?;
    Ok(ok(json!({"accepted": accepted})))
}

async fn alerts(State(hub): State<Arc<Hub>>, Path(p): Params) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    Ok(ok(blocking(hub, move |h| h.alerts(id)).await?))
}

async fn acknowledge(State(hub): State<Arc<Hub>>, Path(p): Params) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let aid = param(&p, "aid")?;
    Ok(ok(blocking(hub, move |h| h.acknowledge_alert(id, aid)).await?))
}

async fn interventions(State(hub): State<Arc<Hub>>, Path(p): Params) -> ApiResult<Response> {
    let id = param(&p, "id")?;
    let pid: ParticipantId = param(&p, "pid")?;
    Ok(ok(blocking(hub, move |h| h.interventions(id, pid)).await?))
}

async fn scenario_sets(State(hub): State<Arc<Hub>>) -> Response {
    ok(hub.scenario_set_names())
}

async fn fallback() -> ApiError {
    ApiError(CoosError::not_found("route", "requested path"))
}

pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/scenario-sets", get(scenario_sets))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", get(get_events))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/participants", post(join))
        .route("/sessions/{id}/participants/{pid}/question", get(question))
        .route("/sessions/{id}/participants/{pid}/question/{qid}/answer", post(answer))
        .route("/sessions/{id}/participants/{pid}/preference", get(preference))
        .route("/sessions/{id}/participants/{pid}/interventions", get(interventions))
        .route("/sessions/{id}/intent", get(intent))
        .route("/sessions/{id}/consensus", get(consensus))
        .route("/sessions/{id}/constraints", post(constraints))
        .route("/sessions/{id}/alerts", get(alerts))
        .route("/sessions/{id}/alerts/{aid}/ack", post(acknowledge))
        .route("/telemetry", post(telemetry))
        .fallback(fallback)
        .with_state(hub)
}

/// Serves the API until Ctrl-C.
pub async fn serve(addr: SocketAddr, hub: Arc<Hub>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(hub))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
