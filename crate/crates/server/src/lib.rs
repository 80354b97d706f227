//! HTTP session service.
//!
//! Each session owns one [`ViewContext`] over a project model. Actions on a
//! session are applied one at a time under the session lock; different
//! sessions never share mutable state. Responses are the diagram documents
//! described in `docs/diagram-document.md`.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | `POST` | `/sessions` | [`CreateSession`] (optional) | [`SessionCreated`] |
//! | `GET` | `/sessions/{id}/diagram?view=V` | | diagram document |
//! | `POST` | `/sessions/{id}/actions?view=V` | action | diagram document |
//! | `GET` | `/sessions/{id}/vcm` | | view context document |
//! | `PUT` | `/sessions/{id}/vcm` | view context document | restore report |
//! | `GET` | `/sessions/{id}/export.svg?view=V` | | SVG |
//! | `DELETE` | `/sessions/{id}` | | 204 |
//! | `GET` | `/meta` | | [`Meta`] |

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use archviz_core::archmeta::ValidatedArchitecture;
use archviz_core::diagram::{layout, render_doc, render_svg, synthesize, DiagramDocument, LayoutConfig, DIAGRAM_FORMAT_VERSION};
use archviz_core::projmodel::{load_pm, ProjectModel, FORMAT_VERSION as PM_FORMAT_VERSION};
use archviz_core::viewctx::{restore_vcm, Action, CtxError, RestoreReport, VCM_FORMAT_VERSION};
use archviz_core::vizmeta::{link_viz, parse_viz, ValidatedViz};
use archviz_core::ViewContext;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(60 * 60);

/// The models a server is started with. New sessions use them unless the
/// request supplies its own project model or visualization.
#[derive(Debug, Clone)]
pub struct Models {
    pub arch: Arc<ValidatedArchitecture>,
    pub viz: Arc<ValidatedViz>,
    pub pm: Arc<ProjectModel>,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub idle_timeout: Duration,
    pub layout: LayoutConfig,
    /// Static front end assets, served for every path the API does not own.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { idle_timeout: DEFAULT_IDLE_TIMEOUT, layout: LayoutConfig::default(), ui_dir: None }
    }
}

pub struct Session {
    pub id: String,
    pm: Arc<ProjectModel>,
    viz: Arc<ValidatedViz>,
    inner: Mutex<SessionInner>,
}

struct SessionInner {
    ctx: ViewContext,
    last_active: Instant,
}

impl Session {
    /// Runs `f` with the session's context locked and marks it active.
    fn with<T>(&self, f: impl FnOnce(&mut ViewContext) -> T) -> T {
        let mut inner = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        inner.last_active = Instant::now();
        f(&mut inner.ctx)
    }

    /// Snapshot of the current context.
    pub fn context(&self) -> ViewContext {
        self.with(|ctx| ctx.clone())
    }
}

pub struct AppState {
    pub models: Models,
    pub config: ServerConfig,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl AppState {
    pub fn new(models: Models, config: ServerConfig) -> Arc<Self> {
        Arc::new(Self { models, config, sessions: RwLock::new(HashMap::new()) })
    }

    pub fn session(&self, id: &str) -> Option<Arc<Session>> {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).get(id).cloned()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    /// Drops sessions idle for longer than the configured timeout as of
    /// `now`. Sessions busy with a request are kept. Returns how many were
    /// removed.
    pub fn evict_idle(&self, now: Instant) -> usize {
        let timeout = self.config.idle_timeout;
        let mut sessions = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        let before = sessions.len();
        sessions.retain(|_, s| match s.inner.try_lock() {
            Ok(inner) => now.saturating_duration_since(inner.last_active) <= timeout,
            Err(_) => true,
        });
        before - sessions.len()
    }

    fn insert(&self, session: Session) -> Arc<Session> {
        let session = Arc::new(session);
        self.sessions.write().unwrap_or_else(|e| e.into_inner()).insert(session.id.clone(), session.clone());
        session
    }
}

/// Evicts idle sessions every `period` until the runtime shuts down.
pub fn spawn_eviction(state: Arc<AppState>, period: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let removed = state.evict_idle(Instant::now());
            if removed > 0 {
                tracing::info!(removed, "evicted idle sessions");
            }
        }
    })
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<CtxError> for ApiError {
    fn from(e: CtxError) -> Self {
        let status = match e {
            CtxError::Malformed(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::CONFLICT,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Body of `POST /sessions`. Every field is optional; omitted models fall
/// back to the ones the server was started with.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CreateSession {
    /// Project model document, inline as an object or as text.
    pub pm: Option<Value>,
    /// Path of a `.spvizpm.json` file readable by the server.
    pub pm_path: Option<PathBuf>,
    /// Visualization source text for the server's architecture.
    pub viz: Option<String>,
    pub viz_path: Option<PathBuf>,
    /// View context to restore, inline as an object or as text.
    pub vcm: Option<Value>,
    /// View of the returned diagram.
    pub view: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionCreated {
    pub session: String,
    pub views: Vec<String>,
    pub diagram: DiagramDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restore: Option<RestoreReport>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Meta {
    pub architecture: ArchitectureMeta,
    pub visualization: VisualizationMeta,
    pub project: ProjectMeta,
    pub format_versions: BTreeMap<&'static str, &'static str>,
}

#[derive(Debug, Serialize)]
pub struct ArchitectureMeta {
    pub name: String,
    pub artifacts: Vec<ArtifactMeta>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ArtifactMeta {
    pub name: String,
    pub qualified_name: String,
    pub contains: Vec<String>,
    pub connections: Vec<ConnectionMeta>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConnectionMeta {
    pub name: String,
    pub qualified_name: String,
    pub target: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VisualizationMeta {
    pub name: String,
    pub views: Vec<ViewMeta>,
    /// View names nested in each expandable artifact type.
    pub artifact_views: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewMeta {
    pub name: String,
    pub artifacts: Vec<String>,
    pub connections: Vec<String>,
    pub categories: Vec<CategoryMeta>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CategoryMeta {
    pub connection: String,
    pub via: String,
    pub inner_view: String,
}

#[derive(Debug, Serialize)]
pub struct ProjectMeta {
    pub name: String,
    pub instances: usize,
    pub collections: BTreeMap<String, usize>,
}

pub fn meta(models: &Models) -> Meta {
    let arch = &models.arch;
    let viz = &models.viz;
    let artifacts = arch
        .artifact_ids()
        .map(|a| ArtifactMeta {
            name: arch.artifact_name(a).to_string(),
            qualified_name: arch.qualified_artifact_name(a),
            contains: arch.children(a).iter().map(|&c| arch.qualified_artifact_name(c)).collect(),
            connections: arch
                .connections(a)
                .map(|c| ConnectionMeta {
                    name: arch.connection_name(c).to_string(),
                    qualified_name: arch.qualified_connection_name(c),
                    target: arch.qualified_artifact_name(arch.connection_target(c)),
                })
                .collect(),
        })
        .collect();
    let views = viz
        .views()
        .iter()
        .map(|v| ViewMeta {
            name: v.name.clone(),
            artifacts: v.artifacts.iter().map(|&a| arch.qualified_artifact_name(a)).collect(),
            connections: v.connections.iter().map(|&c| arch.qualified_connection_name(c)).collect(),
            categories: v
                .categories
                .iter()
                .map(|c| CategoryMeta {
                    connection: arch.qualified_connection_name(c.connection),
                    via: arch.qualified_artifact_name(c.chain[0]),
                    inner_view: viz.view(c.inner_view).name.clone(),
                })
                .collect(),
        })
        .collect();
    let artifact_views = viz
        .all_artifact_views()
        .iter()
        .map(|(&a, avs)| (arch.qualified_artifact_name(a), avs.iter().map(|av| viz.view(av.view).name.clone()).collect()))
        .collect();
    Meta {
        architecture: ArchitectureMeta { name: arch.model_name().to_string(), artifacts },
        visualization: VisualizationMeta { name: viz.name().to_string(), views, artifact_views },
        project: ProjectMeta {
            name: models.pm.project_name().to_string(),
            instances: models.pm.len(),
            collections: models.pm.collection_sizes(),
        },
        format_versions: BTreeMap::from([
            ("diagram", DIAGRAM_FORMAT_VERSION),
            ("projectModel", PM_FORMAT_VERSION),
            ("viewContext", VCM_FORMAT_VERSION),
        ]),
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct ViewQuery {
    pub view: Option<String>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

fn json_text(value: Value) -> String {
    match value {
        Value::String(text) => text,
        other => other.to_string(),
    }
}

fn read_file(path: &std::path::Path) -> ApiResult<String> {
    std::fs::read_to_string(path).map_err(|e| ApiError::bad_request(format!("{}: {e}", path.display())))
}

/// Diagram document for `view`. The view must exist; if it is hidden the
/// first visible view is rendered instead, and with every view hidden the
/// document is empty.
pub fn render_view(ctx: &ViewContext, view: &str, cfg: &LayoutConfig) -> Result<DiagramDocument, CtxError> {
    if ctx.viz().view_id(view).is_none() {
        return Err(CtxError::UnknownView(view.to_string()));
    }
    let shown = std::iter::once(view)
        .chain(ctx.viz().views().iter().map(|v| v.name.as_str()))
        .find(|v| ctx.is_view_visible(v));
    match shown {
        Some(v) => Ok(render_doc(&layout(&synthesize(ctx, v)?, cfg))),
        None => Ok(DiagramDocument {
            format_version: DIAGRAM_FORMAT_VERSION.to_string(),
            view: view.to_string(),
            width: 0.0,
            height: 0.0,
            nodes: Vec::new(),
            ports: Vec::new(),
            edges: Vec::new(),
        }),
    }
}

fn default_view(viz: &ValidatedViz) -> String {
    viz.views().first().map(|v| v.name.clone()).unwrap_or_default()
}

/// Resolves the requested view, 404 if the visualization lacks it.
fn requested_view(session: &Session, query: &ViewQuery) -> ApiResult<String> {
    match &query.view {
        Some(v) if session.viz.view_id(v).is_none() => Err(ApiError::not_found(format!(
            "unknown view `{v}`; available: {}",
            session.viz.view_names().join(", ")
        ))),
        Some(v) => Ok(v.clone()),
        None => Ok(default_view(&session.viz)),
    }
}

fn find_session(state: &AppState, id: &str) -> ApiResult<Arc<Session>> {
    state.session(id).ok_or_else(|| ApiError::not_found(format!("unknown session `{id}`")))
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<SessionCreated>)> {
    let req: CreateSession = if body.iter().all(u8::is_ascii_whitespace) { CreateSession::default() } else { parse_json(&body)? };
    let arch = state.models.arch.clone();
    let pm_text = match (req.pm, &req.pm_path) {
        (Some(_), Some(_)) => return Err(ApiError::bad_request("give either `pm` or `pmPath`, not both")),
        (Some(v), None) => Some(json_text(v)),
        (None, Some(p)) => Some(read_file(p)?),
        (None, None) => None,
    };
    let pm = match pm_text {
        Some(text) => Arc::new(load_pm(&text, arch.clone()).map_err(|e| ApiError::bad_request(e.to_string()))?),
        None => state.models.pm.clone(),
    };
    let viz_text = match (req.viz, &req.viz_path) {
        (Some(_), Some(_)) => return Err(ApiError::bad_request("give either `viz` or `vizPath`, not both")),
        (Some(t), None) => Some(t),
        (None, Some(p)) => Some(read_file(p)?),
        (None, None) => None,
    };
    let viz = match viz_text {
        Some(text) => {
            let diags = |d: Vec<archviz_core::Diagnostic>| {
                ApiError::bad_request(d.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))
            };
            Arc::new(link_viz(parse_viz(&text).map_err(diags)?, arch).map_err(diags)?)
        }
        None => state.models.viz.clone(),
    };
    let (ctx, restore) = match req.vcm {
        Some(v) => {
            let (ctx, report) = restore_vcm(&json_text(v), pm.clone(), viz.clone())?;
            (ctx, Some(report))
        }
        None => (ViewContext::new(pm.clone(), viz.clone())?, None),
    };
    let id = uuid::Uuid::new_v4().to_string();
    let session = state.insert(Session {
        id: id.clone(),
        pm,
        viz: viz.clone(),
        inner: Mutex::new(SessionInner { ctx, last_active: Instant::now() }),
    });
    let view = requested_view(&session, &ViewQuery { view: req.view })?;
    let diagram = session.with(|ctx| render_view(ctx, &view, &state.config.layout))?;
    let views = viz.view_names().into_iter().map(str::to_string).collect();
    tracing::debug!(session = %id, "created session");
    Ok((StatusCode::CREATED, Json(SessionCreated { session: id, views, diagram, restore })))
}

async fn get_diagram(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<ViewQuery>,
) -> ApiResult<Json<DiagramDocument>> {
    let session = find_session(&state, &id)?;
    let view = requested_view(&session, &query)?;
    Ok(Json(session.with(|ctx| render_view(ctx, &view, &state.config.layout))?))
}

async fn post_action(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<ViewQuery>,
    body: Bytes,
) -> ApiResult<Json<DiagramDocument>> {
    let session = find_session(&state, &id)?;
    let view = requested_view(&session, &query)?;
    let action: Action = parse_json(&body)?;
    let doc = session.with(|ctx| {
        ctx.apply(&action)?;
        render_view(ctx, &view, &state.config.layout)
    })?;
    Ok(Json(doc))
}

async fn get_vcm(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let session = find_session(&state, &id)?;
    let text = session.with(|ctx| ctx.export_vcm());
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

async fn put_vcm(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<RestoreReport>> {
    let session = find_session(&state, &id)?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    let (restored, report) = restore_vcm(text, session.pm.clone(), session.viz.clone())?;
    session.with(|ctx| *ctx = restored);
    Ok(Json(report))
}

async fn export_svg(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<ViewQuery>,
) -> ApiResult<Response> {
    let session = find_session(&state, &id)?;
    let view = requested_view(&session, &query)?;
    let svg = session.with(|ctx| -> Result<String, CtxError> {
        Ok(render_svg(&layout(&synthesize(ctx, &view)?, &state.config.layout)))
    })?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
}

async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let removed = state.sessions.write().unwrap_or_else(|e| e.into_inner()).remove(&id);
    match removed {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(format!("unknown session `{id}`"))),
    }
}

async fn get_meta(State(state): State<Arc<AppState>>) -> Json<Meta> {
    Json(meta(&state.models))
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/meta", get(get_meta))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/diagram", get(get_diagram))
        .route("/sessions/{id}/actions", post(post_action))
        .route("/sessions/{id}/vcm", get(get_vcm).put(put_vcm))
        .route("/sessions/{id}/export.svg", get(export_svg));
    let api = match &state.config.ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    };
    api.with_state(state)
}

/// Serves until the listener fails, evicting idle sessions once a minute.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    let eviction = spawn_eviction(state.clone(), Duration::from_secs(60));
    let result = axum::serve(listener, router(state)).await;
    eviction.abort();
    result
}
