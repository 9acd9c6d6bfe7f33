//! HTTP API used by the editor.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use calliope_core::export::{export, fact_record, layout_record, narrative_record, Export, FactRecord, LayoutRecord, NarrativeRecord};
use calliope_core::facts::{recommend_facts, FocusQuery, GraphFact};
use calliope_core::pipeline::{
    apply_moves, discover, fact_texts, generate_from_pool, poster, relayout, reoptimize_story, search_node, GenerateRequest, Move,
    PipelineConfig, Story,
};
use calliope_core::render::render_svg;
use calliope_core::text::{summary_text, Templates};
use calliope_core::Error as CoreError;
use log::info;
use serde::{Deserialize, Serialize};

use crate::config::{parse_partition, parse_topic};
use crate::store::{Session, Store, StoreError};

pub struct AppState {
    pub store: Store,
    pub cfg: PipelineConfig,
    pub templates: Templates,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let status = match e {
            CoreError::InfeasibleTopic { .. } | CoreError::NoSkeletons | CoreError::EmptyFactPool => StatusCode::UNPROCESSABLE_ENTITY,
            CoreError::UnknownElement(_) | CoreError::UnknownFact(_) | CoreError::UnknownFocus(_) => StatusCode::NOT_FOUND,
            CoreError::Cancelled => StatusCode::CONFLICT,
            CoreError::NoConvergence { .. } | CoreError::AnnotationTooLarge(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownSession(_) => ApiError::new(StatusCode::NOT_FOUND, e.to_string()),
            StoreError::Graph(g) => g.into(),
            _ => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = Arc<AppState>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/graphs", post(upload))
        .route("/api/sessions/{id}", get(info_handler))
        .route("/api/sessions/{id}/generate", post(generate_handler))
        .route("/api/sessions/{id}/cancel", post(cancel_handler))
        .route("/api/sessions/{id}/narrative", get(get_narrative).patch(patch_narrative))
        .route("/api/sessions/{id}/recommend", get(recommend))
        .route("/api/sessions/{id}/layout", post(layout_handler))
        .route("/api/sessions/{id}/search", get(search))
        .route("/api/sessions/{id}/export", get(export_handler))
        .with_state(Arc::new(state))
}

/// Runs `f` on the locked session off the async runtime.
async fn with_session<T, F>(state: &Shared, id: &str, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut Session, &AppState) -> ApiResult<T> + Send + 'static,
{
    let session = state.store.get(id)?;
    let mut guard = session.lock_owned().await;
    let state = state.clone();
    tokio::task::spawn_blocking(move || f(&mut guard, &state))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

/// Records one mutation: bumps the revision and persists the session.
fn commit(s: &mut Session, state: &AppState) -> ApiResult<u64> {
    s.doc.revision += 1;
    state.store.persist(&s.doc)?;
    Ok(s.doc.revision)
}

fn story(s: &Session) -> ApiResult<&Story> {
    s.doc.story.as_ref().ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "nothing generated yet"))
}

fn pool<'a>(s: &'a mut Session, state: &AppState, seed: u64) -> ApiResult<&'a [GraphFact]> {
    if s.pool.as_ref().is_none_or(|(k, _)| *k != seed) {
        let facts = discover(&s.graph, &state.cfg, seed)?;
        s.pool = Some((seed, facts));
    }
    Ok(&s.pool.as_ref().expect("filled above").1)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Uploaded {
    pub session_id: String,
    pub nodes: usize,
    pub edges: usize,
    pub warnings: Vec<String>,
}

async fn upload(State(state): State<Shared>, body: String) -> ApiResult<(StatusCode, Json<Uploaded>)> {
    let st = state.clone();
    let (id, g, warnings) = tokio::task::spawn_blocking(move || st.store.create(body))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    info!("session {id}: {} nodes, {} edges", g.node_count(), g.edge_count());
    Ok((StatusCode::CREATED, Json(Uploaded { session_id: id, nodes: g.node_count(), edges: g.edge_count(), warnings })))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionInfo {
    pub session_id: String,
    pub revision: u64,
    pub nodes: usize,
    pub edges: usize,
    pub generated: bool,
}

async fn info_handler(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<SessionInfo>> {
    let session = state.store.get(&id)?;
    let s = session.lock().await;
    Ok(Json(SessionInfo {
        session_id: s.doc.id.clone(),
        revision: s.doc.revision,
        nodes: s.graph.node_count(),
        edges: s.graph.edge_count(),
        generated: s.doc.story.is_some(),
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct GenerateBody {
    pub topic: Option<String>,
    pub partition: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Revisioned {
    pub revision: u64,
    pub export: Export,
}

fn export_of(s: &Session, state: &AppState) -> ApiResult<Export> {
    let st = story(s)?;
    let p = poster(&s.graph, st, &state.cfg, &state.templates);
    Ok(export(&s.graph, &st.narrative, &st.layout, &p))
}

async fn generate_handler(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Option<Json<GenerateBody>>,
) -> ApiResult<Json<Revisioned>> {
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let req = GenerateRequest {
        topic: parse_topic(body.topic.as_deref())?,
        partition: parse_partition(body.partition.as_deref())?,
        seed: body.seed.unwrap_or(0),
    };
    let sid = id.clone();
    with_session(&state, &id, move |s, state| {
        let cancel = state.store.begin(&sid);
        let seed = req.seed;
        pool(s, state, seed)?;
        let facts = &s.pool.as_ref().expect("pool filled").1;
        let st = generate_from_pool(&s.graph, facts, &req, &state.cfg, &state.templates, &cancel)?;
        s.doc.story = Some(st);
        let revision = commit(s, state)?;
        Ok(Json(Revisioned { revision, export: export_of(s, state)? }))
    })
    .await
}

async fn cancel_handler(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    state.store.get(&id)?;
    state.store.cancel(&id)?;
    Ok(StatusCode::ACCEPTED)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NarrativeView {
    pub revision: u64,
    pub narrative: NarrativeRecord,
    pub texts: BTreeMap<String, String>,
    pub summary: String,
}

fn narrative_view(s: &Session, state: &AppState) -> ApiResult<NarrativeView> {
    let st = story(s)?;
    Ok(NarrativeView {
        revision: s.doc.revision,
        narrative: narrative_record(&s.graph, &st.narrative),
        texts: fact_texts(&st.narrative, &s.graph, &state.templates, &st.overrides),
        summary: summary_text(&st.narrative, &s.graph, &state.templates, &st.overrides),
    })
}

async fn get_narrative(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<NarrativeView>> {
    with_session(&state, &id, |s, state| narrative_view(s, state).map(Json)).await
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum EditOp {
    Add { fact: String },
    Remove { fact: String },
    Reorder { order: Vec<String> },
    #[serde(alias = "editText")]
    EditText { fact: String, text: String },
}

#[derive(Debug, Deserialize)]
pub struct EditBody {
    pub ops: Vec<EditOp>,
}

async fn patch_narrative(State(state): State<Shared>, Path(id): Path<String>, Json(body): Json<EditBody>) -> ApiResult<Json<NarrativeView>> {
    with_session(&state, &id, move |s, state| {
        let mut st = story(s)?.clone();
        let mut structural = false;
        for op in &body.ops {
            let expansion = &state.cfg.organize.expansion;
            match op {
                EditOp::Add { fact } => {
                    let f = pool(s, state, st.request.seed)?
                        .iter()
                        .find(|f| &f.id == fact)
                        .cloned()
                        .ok_or_else(|| CoreError::UnknownFact(fact.clone()))?;
                    st.narrative.add_fact(f, &s.graph, expansion)?;
                    structural = true;
                }
                EditOp::Remove { fact } => {
                    st.narrative.remove_fact(fact, &s.graph, expansion)?;
                    st.overrides.remove(fact);
                    structural = true;
                }
                EditOp::Reorder { order } => {
                    st.narrative.reorder(order.clone())?;
                    structural = true;
                }
                EditOp::EditText { fact, text } => {
                    if !st.narrative.contains(fact) {
                        return Err(CoreError::UnknownFact(fact.clone()).into());
                    }
                    st.overrides.insert(fact.clone(), text.clone());
                }
            }
        }
        if structural {
            relayout(&s.graph, &mut st, &state.cfg, &state.templates)?;
        }
        s.doc.story = Some(st);
        commit(s, state)?;
        narrative_view(s, state).map(Json)
    })
    .await
}

#[derive(Debug, Deserialize)]
pub struct RecommendQuery {
    pub focus: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Recommendation {
    pub fact: FactRecord,
    pub text: String,
    pub in_narrative: bool,
    /// Change of the narrative reward if the fact were added.
    pub gain: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Recommendations {
    pub revision: u64,
    pub focus: String,
    pub facts: Vec<Recommendation>,
}

async fn recommend(State(state): State<Shared>, Path(id): Path<String>, Query(q): Query<RecommendQuery>) -> ApiResult<Json<Recommendations>> {
    let query: FocusQuery = q.focus.parse()?;
    with_session(&state, &id, move |s, state| {
        let st = story(s)?.clone();
        let method = st.request.partition.clone();
        pool(s, state, st.request.seed)?;
        let facts = recommend_facts(&s.graph, &s.pool.as_ref().expect("pool filled").1, &query, &method)?;
        let g = &s.graph;
        let texts = fact_texts(&st.narrative, g, &state.templates, &st.overrides);
        let facts = facts
            .into_iter()
            .map(|f| {
                let in_narrative = st.narrative.contains(&f.id);
                let gain = if in_narrative {
                    0.0
                } else {
                    let mut n = st.narrative.clone();
                    match n.add_fact(f.clone(), g, &state.cfg.organize.expansion) {
                        Ok(()) => n.rewards.R - st.narrative.rewards.R,
                        Err(_) => 0.0,
                    }
                };
                let text = texts.get(&f.id).cloned().unwrap_or_else(|| calliope_core::text::annotation_text(&f, g, &state.templates));
                Recommendation { fact: fact_record(g, &f), text, in_narrative, gain }
            })
            .collect();
        Ok(Json(Recommendations { revision: s.doc.revision, focus: q.focus, facts }))
    })
    .await
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct LayoutBody {
    pub moves: Vec<Move>,
    /// Annotation ids to pin in place.
    pub pins: Vec<String>,
    pub unpin: Vec<String>,
    pub reoptimize: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LayoutView {
    pub revision: u64,
    pub pinned: Vec<String>,
    pub layout: LayoutRecord,
}

async fn layout_handler(State(state): State<Shared>, Path(id): Path<String>, Json(body): Json<LayoutBody>) -> ApiResult<Json<LayoutView>> {
    with_session(&state, &id, move |s, state| {
        let mut st = story(s)?.clone();
        apply_moves(&s.graph, &mut st, &body.moves, &state.templates)?;
        for p in &body.pins {
            if st.layout.rect(p).is_none() {
                return Err(CoreError::UnknownElement(p.clone()).into());
            }
            st.pinned.insert(p.clone());
        }
        for p in &body.unpin {
            st.pinned.remove(p);
        }
        if body.reoptimize {
            reoptimize_story(&s.graph, &mut st, &state.cfg, &state.templates)?;
        }
        let view = LayoutView { revision: 0, pinned: st.pinned.iter().cloned().collect(), layout: layout_record(&s.graph, &st.layout) };
        s.doc.story = Some(st);
        let revision = commit(s, state)?;
        Ok(Json(LayoutView { revision, ..view }))
    })
    .await
}

#[derive(Debug, Deserialize)]
pub struct SearchQuery {
    #[serde(default)]
    pub q: String,
}

async fn search(State(state): State<Shared>, Path(id): Path<String>, Query(q): Query<SearchQuery>) -> ApiResult<Json<Vec<String>>> {
    let session = state.store.get(&id)?;
    let s = session.lock().await;
    Ok(Json(search_node(&s.graph, &q.q)))
}

#[derive(Debug, Deserialize)]
pub struct ExportQuery {
    pub format: Option<String>,
}

async fn export_handler(State(state): State<Shared>, Path(id): Path<String>, Query(q): Query<ExportQuery>) -> ApiResult<Response> {
    let format = q.format.unwrap_or_else(|| "json".into());
    if format != "svg" && format != "json" {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unknown export format '{format}'")));
    }
    let (revision, body, mime) = with_session(&state, &id, move |s, state| {
        let st = story(s)?;
        let p = poster(&s.graph, st, &state.cfg, &state.templates);
        let (body, mime) = if format == "svg" {
            (render_svg(&p), "image/svg+xml")
        } else {
            let e = export(&s.graph, &st.narrative, &st.layout, &p);
            (serde_json::to_string_pretty(&e).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))? + "\n", "application/json")
        };
        Ok((s.doc.revision, body, mime))
    })
    .await?;
    let mut resp = body.into_response();
    resp.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static(mime));
    resp.headers_mut().insert("x-revision", HeaderValue::from(revision));
    Ok(resp)
}
