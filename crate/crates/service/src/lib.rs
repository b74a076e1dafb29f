//! HTTP front end over the session store.
//!
//! Endpoints:
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/api/sessions` | create, body `{"backend": "sim" \| "eve"}` |
//! | GET | `/api/sessions/{id}` | session resource |
//! | POST | `/api/sessions/{id}/message` | `{"text": ...}` or an explicit user event |
//! | GET | `/api/sessions/{id}/topology` | canonical topology document |
//! | POST | `/api/sessions/{id}/query` | `{"command": ...}` |
//! | GET | `/api/sessions/{id}/events` | transcript as server-sent events |
//! | GET | `/api/sessions/{id}/pending/{token}` | result of a message that outlived the timeout |
//!
//! Every response carries `X-T2N-Schema: t2n-topology/1`.

use std::collections::HashMap;
use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::broadcast;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use t2n_core::validate::ValidationReport;
use t2n_core::TopologyDocument;
use t2n_session::{
    Backend, Phase, SessionState, SessionStore, StoreError, SystemEvent, TranscriptEntry, UserEvent,
};

pub const SCHEMA_HEADER: &str = "x-t2n-schema";
pub const SCHEMA: &str = "t2n-topology/1";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Origins allowed by CORS; empty means any origin.
    pub cors_origins: Vec<String>,
    /// Built UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
    /// How long a message request waits before answering 202 with a token.
    pub message_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            cors_origins: Vec::new(),
            static_dir: None,
            message_timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiSessionResource {
    pub session_id: String,
    pub phase: Phase,
    pub backend: Backend,
    pub step_count: u32,
    pub transcript: Vec<TranscriptEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
}

impl From<SessionState> for ApiSessionResource {
    fn from(s: SessionState) -> Self {
        ApiSessionResource {
            session_id: s.session_id,
            phase: s.phase,
            backend: s.backend,
            step_count: s.step_count,
            transcript: s.history,
            topology: s.topology,
            report: s.report,
        }
    }
}

type Pending = Option<(StatusCode, Value)>;

pub struct AppState {
    pub store: Arc<SessionStore>,
    config: ServiceConfig,
    streams: Mutex<HashMap<String, broadcast::Sender<(usize, String)>>>,
    pending: Arc<Mutex<HashMap<String, Pending>>>,
}

impl AppState {
    pub fn new(store: SessionStore, config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState {
            store: Arc::new(store),
            config,
            streams: Mutex::new(HashMap::new()),
            pending: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    fn channel(&self, id: &str) -> broadcast::Sender<(usize, String)> {
        self.streams
            .lock()
            .unwrap()
            .entry(id.to_string())
            .or_insert_with(|| broadcast::channel(64).0)
            .clone()
    }

    fn publish(&self, id: &str, index: usize, entries: [TranscriptEntry; 2]) {
        let tx = self.channel(id);
        for (k, e) in entries.into_iter().enumerate() {
            let _ = tx.send((
                index + k,
                serde_json::to_string(&e).expect("entry serializes"),
            ));
        }
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => ApiError(StatusCode::NOT_FOUND, e.to_string()),
            StoreError::Illegal(_) => ApiError(StatusCode::CONFLICT, e.to_string()),
        }
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f)
        .await
        .expect("blocking task panicked")
}

#[derive(Deserialize)]
struct CreateBody {
    #[serde(default)]
    backend: Option<String>,
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<CreateBody>>,
) -> Result<Response, ApiError> {
    let requested = body
        .and_then(|Json(b)| b.backend)
        .unwrap_or_else(|| "sim".into());
    let backend: Backend = requested
        .parse()
        .map_err(|e: String| ApiError(StatusCode::BAD_REQUEST, e))?;
    if backend == Backend::Eve && app.store.context().eve.is_none() {
        return Err(ApiError(
            StatusCode::SERVICE_UNAVAILABLE,
            "no EVE-NG emulator is configured".into(),
        ));
    }
    let id = app.store.create(backend);
    let state = app.store.snapshot(&id)?;
    let mut body = serde_json::to_value(ApiSessionResource::from(state)).unwrap();
    body["welcome"] = json!(t2n_session::WELCOME);
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn get_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<ApiSessionResource>, ApiError> {
    let store = app.store.clone();
    let state = blocking(move || store.snapshot(&id)).await?;
    Ok(Json(state.into()))
}

/// `{"text": ...}` is read as the event the phase expects; an explicit
/// `{"event": ...}` body is applied as given.
#[derive(Deserialize)]
#[serde(untagged)]
enum MessageBody {
    Event(UserEvent),
    Text { text: String },
}

fn inferred(state: &SessionState, text: String) -> UserEvent {
    match state.phase {
        Phase::AwaitingScenario | Phase::Failed => UserEvent::SubmitScenario { text },
        Phase::AwaitingClarification => UserEvent::Reply { text },
        Phase::Provisioned => UserEvent::Query { command: text },
    }
}

fn event_status(ev: &SystemEvent) -> StatusCode {
    match ev {
        SystemEvent::Error {
            code: t2n_session::ErrorCode::QuerySyntax,
            ..
        } => StatusCode::BAD_REQUEST,
        _ => StatusCode::OK,
    }
}

fn run_event(app: &AppState, id: &str, body: MessageBody) -> (StatusCode, Value) {
    let result = app.store.advance_with(id, |state| match body {
        MessageBody::Event(e) => e,
        MessageBody::Text { text } => inferred(state, text),
    });
    match result {
        Ok(a) => {
            let value = serde_json::to_value(&a.reply).unwrap();
            let status = event_status(&a.reply);
            app.publish(
                id,
                a.index,
                [
                    TranscriptEntry::User(a.event),
                    TranscriptEntry::System(a.reply),
                ],
            );
            (status, value)
        }
        Err(e) => {
            let ApiError(status, msg) = e.into();
            (status, json!({ "error": msg }))
        }
    }
}

async fn post_message(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<MessageBody>,
) -> Response {
    let token = uuid::Uuid::new_v4().to_string();
    app.pending.lock().unwrap().insert(token.clone(), None);
    let (worker_app, worker_id, worker_token) = (app.clone(), id.clone(), token.clone());
    let task = tokio::task::spawn_blocking(move || {
        let out = run_event(&worker_app, &worker_id, body);
        worker_app
            .pending
            .lock()
            .unwrap()
            .insert(worker_token, Some(out.clone()));
        out
    });
    match tokio::time::timeout(app.config.message_timeout, task).await {
        Ok(Ok((status, value))) => {
            app.pending.lock().unwrap().remove(&token);
            (status, Json(value)).into_response()
        }
        Ok(Err(e)) => ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
        Err(_) => {
            let poll = format!("/api/sessions/{id}/pending/{token}");
            (
                StatusCode::ACCEPTED,
                Json(json!({ "token": token, "poll": poll })),
            )
                .into_response()
        }
    }
}

async fn get_pending(
    State(app): State<Arc<AppState>>,
    Path((_id, token)): Path<(String, String)>,
) -> Response {
    let mut pending = app.pending.lock().unwrap();
    match pending.get(&token) {
        None => {
            ApiError(StatusCode::NOT_FOUND, format!("no pending result {token}")).into_response()
        }
        Some(None) => (StatusCode::ACCEPTED, Json(json!({ "token": token }))).into_response(),
        Some(Some(_)) => {
            let (status, value) = pending.remove(&token).flatten().unwrap();
            (status, Json(value)).into_response()
        }
    }
}

async fn get_topology(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let store = app.store.clone();
    let state = blocking(move || store.snapshot(&id)).await?;
    match (state.phase, state.topology) {
        (Phase::Provisioned, Some(t)) => Ok((
            [(header::CONTENT_TYPE, "application/json")],
            t.to_canonical_json(),
        )
            .into_response()),
        (phase, _) => Err(ApiError(
            StatusCode::CONFLICT,
            format!("no provisioned topology while {phase:?}"),
        )),
    }
}

#[derive(Deserialize)]
struct QueryBody {
    command: String,
}

async fn post_query(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(q): Json<QueryBody>,
) -> Response {
    let worker = app.clone();
    let (status, value) = blocking(move || {
        worker.store.snapshot(&id).map_err(ApiError::from)?;
        Ok::<_, ApiError>(run_event(
            &worker,
            &id,
            MessageBody::Event(UserEvent::Query { command: q.command }),
        ))
    })
    .await
    .unwrap_or_else(|ApiError(s, m)| (s, json!({ "error": m })));
    (status, Json(value)).into_response()
}

async fn events(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    // Subscribe before the snapshot so nothing falls between the two.
    let rx = app.channel(&id).subscribe();
    let store = app.store.clone();
    let snapshot_id = id.clone();
    let state = blocking(move || store.snapshot(&snapshot_id)).await?;
    let seen = state.history.len();
    let backlog: Vec<(usize, String)> = state
        .history
        .iter()
        .enumerate()
        .map(|(i, e)| (i, serde_json::to_string(e).unwrap()))
        .collect();
    let live = stream::unfold(rx, move |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(item) if item.0 >= seen => return Some((item, rx)),
                Ok(_) | Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    let out = stream::iter(backlog).chain(live).map(|(i, data)| {
        Ok(Event::default()
            .event("transcript")
            .id(i.to_string())
            .data(data))
    });
    Ok(Sse::new(out).keep_alive(KeepAlive::default()))
}

async fn schema_header(req: Request, next: Next) -> Response {
    let mut resp = next.run(req).await;
    resp.headers_mut()
        .insert(SCHEMA_HEADER, HeaderValue::from_static(SCHEMA));
    resp
}

pub fn router(app: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
        .expose_headers([header::HeaderName::from_static(SCHEMA_HEADER)]);
    let cors = if app.config.cors_origins.is_empty() {
        cors.allow_origin(AllowOrigin::any())
    } else {
        let origins: Vec<HeaderValue> = app
            .config
            .cors_origins
            .iter()
            .filter_map(|o| o.parse().ok())
            .collect();
        cors.allow_origin(origins)
    };
    let static_dir = app.config.static_dir.clone();
    let mut r = Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/message", post(post_message))
        .route("/api/sessions/{id}/topology", get(get_topology))
        .route("/api/sessions/{id}/query", post(post_query))
        .route("/api/sessions/{id}/events", get(events))
        .route("/api/sessions/{id}/pending/{token}", get(get_pending))
        .with_state(app);
    if let Some(dir) = static_dir {
        r = r.fallback_service(ServeDir::new(dir));
    }
    r.layer(middleware::from_fn(schema_header)).layer(cors)
}

pub async fn serve(listener: tokio::net::TcpListener, app: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(app)).await
}
