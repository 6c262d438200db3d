//! HTTP service for live spelling sessions.
//!
//! Knowledge bases live in memory and, when a storage directory is set, in
//! `<dir>/<name>.kb`. Each session is serialized by its own mutex; sentence
//! commits and uploads take the knowledge base's write lock.

pub mod api;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use speller_core::engine::{EngineConfig, EngineError, Mandatory, SpellSession, Symbol};
use speller_core::kb::KbError;
use speller_core::KnowledgeBase;
use thiserror::Error;
use uuid::Uuid;

use api::{
    ConfigOverrides, CreateSession, ErrorBody, KbCreated, KbInfo, MatrixView, MetricsView, PostSelection, PostUndo,
    SelectionResult, SessionView, UploadKb,
};

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("no knowledge base named {0:?}")]
    UnknownKb(String),
    #[error("no session {0}")]
    UnknownSession(String),
    #[error("knowledge base {0:?} already exists")]
    KbExists(String),
    #[error("cell ({0}, {1}) is empty")]
    EmptyCell(usize, usize),
    #[error("{0}")]
    BadRequest(String),
    #[error("storage: {0}")]
    Storage(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownKb(_) | ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::KbExists(_) | ApiError::EmptyCell(..) => StatusCode::CONFLICT,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::EmptyCell(r, c) => ApiError::EmptyCell(r, c),
            other => ApiError::BadRequest(other.to_string()),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!("{self}");
        }
        (status, Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

struct KbEntry {
    kb: RwLock<KnowledgeBase>,
    path: Option<PathBuf>,
}

struct SessionResource {
    id: Uuid,
    kb_name: String,
    kb: Arc<KbEntry>,
    config: EngineConfig,
    session: SpellSession,
    started: Instant,
    /// Wall-clock offsets of each logged selection, in seconds.
    wall: Vec<f64>,
    replies: HashMap<String, SelectionResult>,
}

/// Shared server state.
#[derive(Clone, Default)]
pub struct AppState {
    inner: Arc<Inner>,
}

#[derive(Default)]
struct Inner {
    kbs: RwLock<HashMap<String, Arc<KbEntry>>>,
    sessions: RwLock<HashMap<Uuid, Arc<Mutex<SessionResource>>>>,
    kb_dir: Option<PathBuf>,
}

fn valid_kb_name(name: &str) -> bool {
    !name.is_empty() && name.len() <= 64 && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn read<T>(l: &RwLock<T>) -> std::sync::RwLockReadGuard<'_, T> {
    l.read().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn write<T>(l: &RwLock<T>) -> std::sync::RwLockWriteGuard<'_, T> {
    l.write().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn save_atomically(kb: &KnowledgeBase, path: &Path) -> std::io::Result<()> {
    let tmp = path.with_extension("kb.tmp");
    kb.save_to_path(&tmp)?;
    std::fs::rename(tmp, path)
}

impl AppState {
    /// State with no storage directory; knowledge bases are memory-only.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// State backed by `dir`, loading every `*.kb` file in it.
    pub fn with_kb_dir(dir: impl Into<PathBuf>) -> Result<Self, KbError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| KbError::Io { line: 0, source })?;
        let state = Self {
            inner: Arc::new(Inner {
                kb_dir: Some(dir.clone()),
                ..Inner::default()
            }),
        };
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|source| KbError::Io { line: 0, source })?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "kb"))
            .collect();
        entries.sort();
        for path in entries {
            let Some(name) = path.file_stem().and_then(|s| s.to_str()).filter(|n| valid_kb_name(n)) else {
                continue;
            };
            let kb = KnowledgeBase::load_from_path(&path)?;
            tracing::info!(name, sentences = kb.sentences().total(), "loaded knowledge base");
            write(&state.inner.kbs).insert(
                name.to_string(),
                Arc::new(KbEntry {
                    kb: RwLock::new(kb),
                    path: Some(path),
                }),
            );
        }
        Ok(state)
    }

    /// Registers a knowledge base under `name` (persisting it when a storage
    /// directory is set).
    pub fn insert_kb(&self, name: &str, kb: KnowledgeBase) -> ApiResult<()> {
        if !valid_kb_name(name) {
            return Err(ApiError::BadRequest(format!(
                "knowledge-base name {name:?} must be 1-64 characters of [A-Za-z0-9_-]"
            )));
        }
        let mut kbs = write(&self.inner.kbs);
        if kbs.contains_key(name) {
            return Err(ApiError::KbExists(name.to_string()));
        }
        let path = self.inner.kb_dir.as_ref().map(|d| d.join(format!("{name}.kb")));
        if let Some(p) = &path {
            save_atomically(&kb, p).map_err(|e| ApiError::Storage(e.to_string()))?;
        }
        kbs.insert(
            name.to_string(),
            Arc::new(KbEntry {
                kb: RwLock::new(kb),
                path,
            }),
        );
        Ok(())
    }

    /// Runs `f` with read access to a knowledge base.
    pub fn with_kb<R>(&self, name: &str, f: impl FnOnce(&KnowledgeBase) -> R) -> Option<R> {
        let entry = read(&self.inner.kbs).get(name).cloned()?;
        let kb = read(&entry.kb);
        Some(f(&kb))
    }

    pub fn kb_names(&self) -> Vec<String> {
        let mut names: Vec<String> = read(&self.inner.kbs).keys().cloned().collect();
        names.sort();
        names
    }

    fn kb(&self, name: &str) -> ApiResult<Arc<KbEntry>> {
        read(&self.inner.kbs)
            .get(name)
            .cloned()
            .ok_or_else(|| ApiError::UnknownKb(name.to_string()))
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Mutex<SessionResource>>> {
        let unknown = || ApiError::UnknownSession(id.to_string());
        let uuid = Uuid::parse_str(id).map_err(|_| unknown())?;
        read(&self.inner.sessions).get(&uuid).cloned().ok_or_else(unknown)
    }
}

fn kb_info(name: &str, kb: &KnowledgeBase) -> KbInfo {
    let stats = kb.stats();
    KbInfo {
        name: name.to_string(),
        sentences: stats.sentences,
        distinct_sentences: stats.new_sentences,
        distinct_words: stats.distinct_words,
        word_occurrences: stats.word_occurrences,
    }
}

fn view(res: &SessionResource) -> SessionView {
    let s = &res.session;
    let wall = res.wall.last().copied().unwrap_or(0.0);
    let report = s.metrics(&res.config).ok();
    SessionView {
        id: res.id.to_string(),
        kb: res.kb_name.clone(),
        spelled: s.spelled().to_string(),
        ssp: s.ssp().to_string(),
        swp: s.swp().to_string(),
        matrix: MatrixView::new(s.matrix(), &res.config),
        completed: s.completed().iter().map(|c| c.to_string()).collect(),
        metrics: MetricsView::new(report, s.spelled().len() as u64, wall),
    }
}

/// Applies `symbol`, committing a completed sentence under the knowledge
/// base's write lock.
fn select(res: &mut SessionResource, symbol: &Symbol, correct: Option<bool>) -> ApiResult<SelectionResult> {
    let kb_entry = res.kb.clone();
    let applied = if matches!(symbol, Symbol::Mandatory(Mandatory::Terminator(_))) {
        let mut kb = write(&kb_entry.kb);
        let applied = res.session.advance(&kb, &res.config, symbol, correct)?;
        if let Some(sentence) = &applied.completed {
            kb.add_sentence(sentence).map_err(EngineError::from)?;
            if let Some(path) = &kb_entry.path {
                save_atomically(&kb, path).map_err(|e| ApiError::Storage(e.to_string()))?;
            }
        }
        res.session.refresh(&kb, &res.config);
        applied
    } else {
        let kb = read(&kb_entry.kb);
        let applied = res.session.advance(&kb, &res.config, symbol, correct)?;
        res.session.refresh(&kb, &res.config);
        applied
    };
    res.wall.push(res.started.elapsed().as_secs_f64());
    let (delta, erased) = SelectionResult::delta_parts(&applied.delta);
    Ok(SelectionResult {
        delta,
        erased,
        kind: symbol.kind().to_string(),
        sentence_complete: applied.completed.is_some(),
        sentence: applied.completed.map(|s| s.to_string()),
        state: view(res),
    })
}

async fn list_kbs(State(state): State<AppState>) -> Json<Vec<KbInfo>> {
    let infos = state
        .kb_names()
        .into_iter()
        .filter_map(|n| state.with_kb(&n, |kb| kb_info(&n, kb)))
        .collect();
    Json(infos)
}

async fn upload_kb(
    State(state): State<AppState>,
    body: Result<Json<UploadKb>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<KbCreated>)> {
    let Json(req) = body?;
    let mode = req.mode().map_err(ApiError::BadRequest)?;
    let mut kb = KnowledgeBase::new();
    let stats = kb
        .ingest_phrasebook(req.phrasebook.as_bytes(), mode)
        .map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let info = kb_info(&req.name, &kb);
    state.insert_kb(&req.name, kb)?;
    tracing::info!(name = req.name, sentences = stats.sentences, "uploaded knowledge base");
    Ok((StatusCode::CREATED, Json(KbCreated::new(info, &stats))))
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let Json(req) = body?;
    let config = ConfigOverrides::apply(&req.config);
    config.validate().map_err(|e| ApiError::BadRequest(e.to_string()))?;
    let kb = state.kb(&req.kb)?;
    let session = SpellSession::new(&read(&kb.kb), &config);
    let id = Uuid::new_v4();
    let res = SessionResource {
        id,
        kb_name: req.kb,
        kb,
        config,
        session,
        started: Instant::now(),
        wall: Vec::new(),
        replies: HashMap::new(),
    };
    let body = view(&res);
    write(&state.inner.sessions).insert(id, Arc::new(Mutex::new(res)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn get_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<SessionView>> {
    let res = state.session(&id)?;
    let res = lock(&res);
    Ok(Json(view(&res)))
}

async fn delete_session(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<StatusCode> {
    let uuid = Uuid::parse_str(&id).map_err(|_| ApiError::UnknownSession(id.clone()))?;
    match write(&state.inner.sessions).remove(&uuid) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::UnknownSession(id)),
    }
}

fn replay_or(res: &mut SessionResource, nonce: Option<String>, run: impl FnOnce(&mut SessionResource) -> ApiResult<SelectionResult>) -> ApiResult<SelectionResult> {
    if let Some(previous) = nonce.as_ref().and_then(|n| res.replies.get(n)) {
        return Ok(previous.clone());
    }
    let result = run(res)?;
    if let Some(n) = nonce {
        res.replies.insert(n, result.clone());
    }
    Ok(result)
}

async fn post_selection(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<PostSelection>, JsonRejection>,
) -> ApiResult<Json<SelectionResult>> {
    let Json(req) = body?;
    let res = state.session(&id)?;
    let mut res = lock(&res);
    let result = replay_or(&mut res, req.nonce, |res| {
        let symbol = res.session.symbol_at(req.row, req.col)?.clone();
        select(res, &symbol, req.correct)
    })?;
    Ok(Json(result))
}

async fn post_undo(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Option<Json<PostUndo>>,
) -> ApiResult<Json<SelectionResult>> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let res = state.session(&id)?;
    let mut res = lock(&res);
    let result = replay_or(&mut res, req.nonce, |res| select(res, &Symbol::Mandatory(Mandatory::Undo), None))?;
    Ok(Json(result))
}

async fn get_metrics(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<MetricsView>> {
    let res = state.session(&id)?;
    let res = lock(&res);
    Ok(Json(view(&res).metrics))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/kbs", post(upload_kb).get(list_kbs))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/selections", post(post_selection))
        .route("/sessions/{id}/undo", post(post_undo))
        .route("/sessions/{id}/metrics", get(get_metrics))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}
