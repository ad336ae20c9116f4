//! JSON-over-HTTP access to a trained model snapshot and its label store.
//!
//! The model is read-only for the lifetime of the server. Label writes go
//! through a single writer: the store is cloned, extended, persisted to
//! disk, and only then published to readers, so a 200 response means the
//! annotation is on disk.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;
use topicmine::report::{agreement, apply_labels, summarize, Annotation, LabelStore};
use topicmine::trends::{topic_trend, Granularity, TrendMode};
use topicmine::{LdaModel, TopicSummary};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Core(#[from] topicmine::Error),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub snapshot: PathBuf,
    pub labels: PathBuf,
    pub bind: SocketAddr,
    pub read_only: bool,
    pub static_dir: Option<PathBuf>,
}

/// Label store shared between handlers.
pub struct LabelHandle {
    path: PathBuf,
    current: RwLock<Arc<LabelStore>>,
    writer: Mutex<()>,
}

impl LabelHandle {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, ServeError> {
        let path = path.into();
        let store = LabelStore::load(&path)?;
        Ok(LabelHandle {
            path,
            current: RwLock::new(Arc::new(store)),
            writer: Mutex::new(()),
        })
    }

    pub fn snapshot(&self) -> Arc<LabelStore> {
        self.current.read().expect("label lock poisoned").clone()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends and persists one annotation, then publishes the new store.
    pub async fn append(&self, annotation: Annotation) -> Result<Annotation, ServeError> {
        let _guard = self.writer.lock().await;
        let mut next = (*self.snapshot()).clone();
        next.push(annotation.clone());
        let path = self.path.clone();
        let next = tokio::task::spawn_blocking(move || next.save(&path).map(|_| next))
            .await
            .map_err(|e| ServeError::Io(std::io::Error::other(e)))??;
        *self.current.write().expect("label lock poisoned") = Arc::new(next);
        Ok(annotation)
    }
}

#[derive(Clone)]
pub struct AppState {
    pub model: Option<Arc<LdaModel>>,
    pub labels: Arc<LabelHandle>,
    pub read_only: bool,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn loaded(state: &AppState) -> Result<&Arc<LdaModel>, ApiError> {
    state
        .model
        .as_ref()
        .ok_or_else(|| ApiError(StatusCode::SERVICE_UNAVAILABLE, "model snapshot not loaded".into()))
}

fn known_topic(model: &LdaModel, id: usize) -> Result<(), ApiError> {
    model
        .check_topic(id)
        .map_err(|e| ApiError(StatusCode::NOT_FOUND, e.to_string()))
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    model_loaded: bool,
    topics: Option<usize>,
    documents: Option<usize>,
    read_only: bool,
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok",
        model_loaded: state.model.is_some(),
        topics: state.model.as_ref().map(|m| m.n_topics()),
        documents: state.model.as_ref().map(|m| m.n_docs()),
        read_only: state.read_only,
    })
}

#[derive(Deserialize)]
struct TopicsQuery {
    n_terms: Option<usize>,
    limit: Option<usize>,
}

#[derive(Serialize)]
pub struct TopicView {
    pub rank: usize,
    #[serde(flatten)]
    pub summary: TopicSummary,
    /// Pairwise agreement among current annotators; absent below two.
    pub agreement: Option<f64>,
}

/// Ranked summaries with labels and agreement, as served by `/api/topics`.
pub fn topic_views(model: &LdaModel, store: &LabelStore, n_terms: usize, limit: Option<usize>) -> Vec<TopicView> {
    let mut summaries = summarize(model, n_terms);
    apply_labels(&mut summaries, store);
    if let Some(limit) = limit {
        summaries.truncate(limit);
    }
    summaries
        .into_iter()
        .enumerate()
        .map(|(i, summary)| TopicView {
            rank: i + 1,
            agreement: agreement(store, &[summary.topic_id]).ok().map(|a| a.overall),
            summary,
        })
        .collect()
}

async fn topics(State(state): State<AppState>, Query(q): Query<TopicsQuery>) -> ApiResult<Vec<TopicView>> {
    let model = loaded(&state)?;
    let n_terms = q.n_terms.unwrap_or(20);
    if n_terms == 0 {
        return Err(ApiError(StatusCode::BAD_REQUEST, "n_terms must be at least 1".into()));
    }
    let store = state.labels.snapshot();
    Ok(Json(topic_views(model, &store, n_terms, q.limit)))
}

#[derive(Deserialize)]
struct TrendQuery {
    granularity: Option<String>,
    mode: Option<String>,
}

async fn trend(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<usize>,
    Query(q): Query<TrendQuery>,
) -> ApiResult<topicmine::TrendSeries> {
    let model = loaded(&state)?;
    known_topic(model, id)?;
    let bad = |e: String| ApiError(StatusCode::BAD_REQUEST, e);
    let granularity: Granularity = q.granularity.as_deref().unwrap_or("month").parse().map_err(bad)?;
    let mode: TrendMode = q.mode.as_deref().unwrap_or("theta-mass").parse().map_err(bad)?;
    match topic_trend(model, model.documents(), granularity, &[id], mode) {
        Ok(mut series) => Ok(Json(series.remove(0))),
        Err(e @ topicmine::Error::NoTimestampedDocuments) => Err(ApiError(StatusCode::CONFLICT, e.to_string())),
        Err(e) => Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())),
    }
}

#[derive(Deserialize)]
struct LabelRequest {
    annotator_id: String,
    label: String,
}

async fn post_label(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<usize>,
    Json(req): Json<LabelRequest>,
) -> ApiResult<Annotation> {
    if state.read_only {
        return Err(ApiError(StatusCode::FORBIDDEN, "server is read-only".into()));
    }
    let model = loaded(&state)?;
    known_topic(model, id)?;
    let label = req.label.trim();
    let annotator = req.annotator_id.trim();
    if label.is_empty() {
        return Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, "label is empty".into()));
    }
    if annotator.is_empty() {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            "annotator_id is empty".into(),
        ));
    }
    let annotation = Annotation {
        topic_id: id,
        annotator_id: annotator.to_string(),
        label: label.to_string(),
        timestamp: Utc::now(),
    };
    state
        .labels
        .append(annotation)
        .await
        .map(Json)
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

#[derive(Serialize)]
struct AgreementView {
    per_topic: std::collections::BTreeMap<usize, f64>,
    overall: Option<f64>,
    topics_evaluated: usize,
}

async fn agreement_view(State(state): State<AppState>) -> Json<AgreementView> {
    let store = state.labels.snapshot();
    let eligible: Vec<usize> = store
        .topics()
        .into_iter()
        .filter(|&t| store.current(t).len() >= 2)
        .collect();
    let a = agreement(&store, &eligible).expect("eligible topics have two annotators");
    Json(AgreementView {
        topics_evaluated: a.per_topic.len(),
        overall: (!a.per_topic.is_empty()).then_some(a.overall),
        per_topic: a.per_topic,
    })
}

pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/topics", get(topics))
        .route("/api/topics/{id}/trend", get(trend))
        .route("/api/topics/{id}/labels", axum::routing::post(post_label))
        .route("/api/agreement", get(agreement_view))
        .with_state(state)
        .layer(CorsLayer::permissive());
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub struct Server {
    listener: tokio::net::TcpListener,
    app: Router,
}

impl Server {
    /// Loads the snapshot and label store, then opens the listener.
    pub async fn bind(config: &ServeConfig) -> Result<Self, ServeError> {
        let model: LdaModel = topicmine::lda::read_snapshot(&config.snapshot)?;
        let labels = LabelHandle::open(&config.labels)?;
        let state = AppState {
            model: Some(Arc::new(model)),
            labels: Arc::new(labels),
            read_only: config.read_only,
        };
        let app = router(state, config.static_dir.as_deref());
        let listener = tokio::net::TcpListener::bind(config.bind)
            .await
            .map_err(|source| ServeError::Bind {
                addr: config.bind,
                source,
            })?;
        Ok(Server { listener, app })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until ctrl-c.
    pub async fn serve(self) -> Result<(), ServeError> {
        axum::serve(self.listener, self.app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    }
}
