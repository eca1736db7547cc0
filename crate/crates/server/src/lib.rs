//! HTTP API for the screening workflow.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/api/queue?pass=title&page=0&per_page=50` | pending documents for the calling reviewer |
//! | POST | `/api/decisions` | record a decision; 201, or 200 when the decision id was already stored |
//! | GET | `/api/prisma` | current flow report |
//! | GET | `/api/conflicts` | documents whose reviews disagree |
//! | POST | `/api/conflicts/{doc_id}/resolve` | settle a conflict |
//!
//! The reviewer id comes from the `x-reviewer-id` header, or from the body
//! of a POST. Mutations take a write lock, so requests are applied one at a
//! time.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use litmap_core::corpus::{DocId, Store};
use litmap_core::screening::{
    prisma_flow, ConflictView, DecisionInput, Pass, QueueItem, ScreeningEngine, ScreeningError, Submitted,
};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;
use uuid::Uuid;

pub const REVIEWER_HEADER: &str = "x-reviewer-id";
pub const DEFAULT_PER_PAGE: usize = 50;
pub const MAX_PER_PAGE: usize = 500;

/// Called after every stored mutation, under the write lock.
pub type PersistHook = Arc<dyn Fn(&Store) -> Result<(), String> + Send + Sync>;
pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct AppState {
    store: RwLock<Store>,
    engine: ScreeningEngine,
    clock: Clock,
    persist: Option<PersistHook>,
}

impl AppState {
    pub fn new(store: Store, engine: ScreeningEngine) -> Self {
        AppState {
            store: RwLock::new(store),
            engine,
            clock: Arc::new(Utc::now),
            persist: None,
        }
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_persist(mut self, hook: PersistHook) -> Self {
        self.persist = Some(hook);
        self
    }

    pub async fn snapshot<T>(&self, f: impl FnOnce(&Store) -> T) -> T {
        f(&*self.store.read().await)
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorBody { error: self.1 })).into_response()
    }
}

impl From<ScreeningError> for ApiError {
    fn from(e: ScreeningError) -> Self {
        let status = match &e {
            ScreeningError::Validation(_) => StatusCode::BAD_REQUEST,
            ScreeningError::UnknownDocument(_) => StatusCode::NOT_FOUND,
            ScreeningError::Invariant(_) | ScreeningError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::CONFLICT,
        };
        ApiError(status, e.to_string())
    }
}

#[derive(Debug, Deserialize)]
pub struct QueueParams {
    pub pass: Option<String>,
    pub page: Option<usize>,
    pub per_page: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueuePage<T = QueueItem> {
    pub pass: Pass,
    pub page: usize,
    pub per_page: usize,
    pub total: usize,
    pub items: Vec<T>,
}

#[derive(Debug, Deserialize)]
pub struct DecisionBody {
    #[serde(default)]
    pub decision_id: Option<Uuid>,
    pub doc_id: DocId,
    pub pass: Pass,
    pub group: i64,
    #[serde(default)]
    pub reviewer: Option<String>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct ResolveBody {
    #[serde(default)]
    pub decision_id: Option<Uuid>,
    pub pass: Pass,
    pub group: i64,
    #[serde(default)]
    pub reviewer: Option<String>,
    #[serde(default)]
    pub note: Option<String>,
}

fn reviewer(headers: &HeaderMap, body: Option<String>) -> Result<String, ApiError> {
    let from_header = headers.get(REVIEWER_HEADER).and_then(|v| v.to_str().ok()).map(str::to_string);
    match (body, from_header) {
        (Some(b), Some(h)) if b != h => Err(ApiError(
            StatusCode::BAD_REQUEST,
            format!("reviewer {b:?} in body does not match header {h:?}"),
        )),
        (Some(r), _) | (None, Some(r)) if !r.trim().is_empty() => Ok(r),
        _ => Err(ApiError(StatusCode::BAD_REQUEST, format!("missing reviewer id (header {REVIEWER_HEADER})"))),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/queue", get(queue))
        .route("/api/decisions", post(decide))
        .route("/api/prisma", get(prisma))
        .route("/api/conflicts", get(conflicts))
        .route("/api/conflicts/:doc_id/resolve", post(resolve))
        .with_state(state)
}

async fn queue(
    State(s): State<Arc<AppState>>,
    headers: HeaderMap,
    Query(q): Query<QueueParams>,
) -> Result<Json<QueuePage>, ApiError> {
    let pass: Pass = q.pass.as_deref().unwrap_or("title").parse()?;
    let page = q.page.unwrap_or(0);
    let per_page = q.per_page.unwrap_or(DEFAULT_PER_PAGE).clamp(1, MAX_PER_PAGE);
    let who = headers.get(REVIEWER_HEADER).and_then(|v| v.to_str().ok());
    let store = s.store.read().await;
    let (total, items) = s.engine.queue(&store, pass, who, page, per_page);
    Ok(Json(QueuePage { pass, page, per_page, total, items }))
}

async fn store_mutation<F>(s: &AppState, f: F) -> Result<Response, ApiError>
where
    F: FnOnce(&ScreeningEngine, &mut Store, DateTime<Utc>) -> Result<Submitted, ScreeningError>,
{
    let mut store = s.store.write().await;
    let sub = f(&s.engine, &mut store, (s.clock)())?;
    if sub.created {
        if let Some(hook) = &s.persist {
            hook(&store).map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e))?;
        }
    }
    let status = if sub.created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(sub.record)).into_response())
}

async fn decide(
    State(s): State<Arc<AppState>>,
    headers: HeaderMap,
    Json(b): Json<DecisionBody>,
) -> Result<Response, ApiError> {
    let input = DecisionInput {
        decision_id: b.decision_id,
        doc_id: b.doc_id,
        pass: b.pass,
        reviewer: reviewer(&headers, b.reviewer)?,
        group: b.group,
        note: b.note,
    };
    store_mutation(&s, |e, store, now| e.decide(store, input, now)).await
}

async fn prisma(State(s): State<Arc<AppState>>) -> impl IntoResponse {
    let store = s.store.read().await;
    Json(prisma_flow(&store, &s.engine))
}

async fn conflicts(State(s): State<Arc<AppState>>) -> Json<Vec<ConflictView>> {
    let store = s.store.read().await;
    Json(s.engine.conflicts(&store))
}

async fn resolve(
    State(s): State<Arc<AppState>>,
    Path(doc_id): Path<String>,
    headers: HeaderMap,
    Json(b): Json<ResolveBody>,
) -> Result<Response, ApiError> {
    let input = DecisionInput {
        decision_id: b.decision_id,
        doc_id: DocId::new(doc_id),
        pass: b.pass,
        reviewer: reviewer(&headers, b.reviewer)?,
        group: b.group,
        note: b.note,
    };
    store_mutation(&s, |e, store, now| e.resolve(store, input, now)).await
}

/// Serves until the process is interrupted.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "screening API listening");
    axum::serve(listener, router(state)).await
}
