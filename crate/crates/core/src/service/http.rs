use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ClientEvent, SessionConfig, SessionManager};
use crate::error::{Error, Result};

/// Header carrying a frame's sequence number on HTTP frame responses.
pub const FRAME_SEQ_HEADER: &str = "x-frame-seq";

/// HTTP view of an engine error.
pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

fn error_kind(e: &Error) -> (StatusCode, &'static str) {
    match e {
        Error::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
        Error::Protocol(_) => (StatusCode::CONFLICT, "protocol"),
        Error::Precondition(_) => (StatusCode::CONFLICT, "precondition"),
        Error::InvalidArgument(_) | Error::Json(_) => (StatusCode::BAD_REQUEST, "invalid_argument"),
        Error::Config(_) => (StatusCode::UNPROCESSABLE_ENTITY, "config"),
        Error::Data(_) | Error::Format(_) => (StatusCode::UNPROCESSABLE_ENTITY, "data"),
        Error::Io { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "io"),
        _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
    }
}

fn error_body(e: &Error) -> Value {
    json!({ "error": error_kind(e).1, "message": e.to_string() })
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (error_kind(&self.0).0, Json(error_body(&self.0))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// Runs blocking engine work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> Result<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| Error::Protocol(format!("worker failed: {e}")))?
}

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(info))
        .route("/sessions/{id}/events", post(event))
        .route("/sessions/{id}/frame", get(frame))
        .route("/sessions/{id}/log", get(export))
        .route("/sessions/{id}/stream", get(stream))
        .with_state(manager)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, manager: Arc<SessionManager>) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::io(addr.to_string(), e))?;
    log::info!("listening on {}", listener.local_addr().map_err(|e| Error::io(addr.to_string(), e))?);
    axum::serve(listener, router(manager)).await.map_err(|e| Error::io(addr.to_string(), e))
}

async fn health(State(m): State<Arc<SessionManager>>) -> Json<Value> {
    Json(json!({ "status": "ok", "sessions": m.len() }))
}

async fn create(State(m): State<Arc<SessionManager>>, body: axum::body::Bytes) -> ApiResult<Response> {
    let config: SessionConfig = serde_json::from_slice(&body).map_err(Error::from)?;
    let info = blocking(move || m.create(&config)).await?;
    Ok((StatusCode::CREATED, Json(info)).into_response())
}

async fn info(State(m): State<Arc<SessionManager>>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(m.info(&id)?).into_response())
}

async fn event(State(m): State<Arc<SessionManager>>, Path(id): Path<String>, body: axum::body::Bytes) -> ApiResult<Response> {
    let ev: ClientEvent = serde_json::from_slice(&body).map_err(Error::from)?;
    let reply = blocking(move || m.ingest(&id, ev)).await?;
    Ok(Json(reply).into_response())
}

#[derive(Deserialize)]
struct GazeQuery {
    x: f64,
    y: f64,
}

async fn frame(State(m): State<Arc<SessionManager>>, Path(id): Path<String>, Query(q): Query<GazeQuery>) -> ApiResult<Response> {
    let f = blocking(move || m.next_frame(&id, q.x, q.y)).await?;
    let mut resp = Response::new(Body::from(f.png.as_ref().clone()));
    let h = resp.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    h.insert(FRAME_SEQ_HEADER, HeaderValue::from(f.seq));
    Ok(resp)
}

#[derive(Deserialize)]
struct ExportQuery {
    #[serde(default)]
    force: bool,
}

async fn export(State(m): State<Arc<SessionManager>>, Path(id): Path<String>, Query(q): Query<ExportQuery>) -> ApiResult<Response> {
    let text = m.export_log(&id, q.force)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

/// Stream envelope, in both directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: String,
    pub session_id: String,
    #[serde(default)]
    pub payload: Value,
}

async fn stream(State(m): State<Arc<SessionManager>>, Path(id): Path<String>, ws: WebSocketUpgrade) -> ApiResult<Response> {
    m.get(&id)?;
    Ok(ws.on_upgrade(move |socket| run_stream(socket, m, id)))
}

fn envelope(kind: &str, id: &str, payload: Value) -> Message {
    let env = Envelope { kind: kind.into(), session_id: id.into(), payload };
    Message::Text(serde_json::to_string(&env).expect("envelope serializes").into())
}

/// Handles one client message, returning the messages to send back.
fn handle_message(m: &SessionManager, id: &str, text: &str) -> Vec<Message> {
    let env: Envelope = match serde_json::from_str(text) {
        Ok(e) => e,
        Err(e) => return vec![envelope("error", id, error_body(&Error::from(e)))],
    };
    if env.session_id != id {
        let e = Error::Protocol(format!("stream is bound to session {id:?}, got {:?}", env.session_id));
        return vec![envelope("error", id, error_body(&e))];
    }
    let result = (|| -> Result<Vec<Message>> {
        match env.kind.as_str() {
            "event" => {
                let ev: ClientEvent = serde_json::from_value(env.payload)?;
                let reply = m.ingest(id, ev)?;
                let mut out = vec![envelope("delta", id, serde_json::to_value(&reply)?)];
                // A gaze sample during the stimulus is answered with a frame.
                if let (ClientEvent::Gaze { x, y, .. }, Some(_)) = (ev, reply.target_label.as_ref()) {
                    if reply.delta.phase == crate::experiment::Phase::Stimulus {
                        let f = m.next_frame(id, x, y)?;
                        out.push(envelope("frame", id, json!({ "seq": f.seq, "index": f.index, "bytes": f.png.len() })));
                        out.push(Message::Binary(f.png.as_ref().clone().into()));
                    }
                }
                Ok(out)
            }
            "info" => Ok(vec![envelope("info", id, serde_json::to_value(m.info(id)?)?)]),
            other => Err(Error::Protocol(format!("unknown message type {other:?}"))),
        }
    })();
    result.unwrap_or_else(|e| vec![envelope("error", id, error_body(&e))])
}

async fn run_stream(socket: WebSocket, m: Arc<SessionManager>, id: String) {
    let (mut tx, mut rx) = socket.split();
    // Messages are handled one at a time, so frames leave in request order.
    while let Some(Ok(msg)) = rx.next().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        let (m2, id2) = (m.clone(), id.clone());
        let out = match tokio::task::spawn_blocking(move || handle_message(&m2, &id2, &text)).await {
            Ok(out) => out,
            Err(e) => vec![envelope("error", &id, json!({ "error": "internal", "message": e.to_string() }))],
        };
        for msg in out {
            if tx.send(msg).await.is_err() {
                return;
            }
        }
    }
}
