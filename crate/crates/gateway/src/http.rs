use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use datavalor::anp::{DeriveOptions, JudgementSet, PairwiseMatrix, PriorityMethod, DEFAULT_CR_THRESHOLD};
use datavalor::catalog::{MetricCatalog, MetricFilter};
use datavalor::scenario::{
    parse_json, result_json, FileStore, MemoryStore, Overrides, ScenarioStore, ValuationScenario,
};
use datavalor::screening::{start_session, DecisionTree, Question};
use datavalor::{Error, Result};

use crate::error::ApiError;
use crate::ops;
use crate::sessions::{SessionEntry, SessionKind, SessionRegistry};

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_SESSION_IDLE: Duration = Duration::from_secs(30 * 60);

/// Everything `serve` needs. Missing paths fall back to built-ins: the
/// default catalog, an in-memory scenario store, the two shipped trees.
#[derive(Debug, Clone)]
pub struct Config {
    pub addr: String,
    pub store_dir: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    /// Extra decision trees; a tree whose id matches a built-in replaces it.
    pub trees: Vec<PathBuf>,
    pub session_idle: Duration,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            addr: DEFAULT_ADDR.into(),
            store_dir: None,
            catalog: None,
            trees: Vec::new(),
            session_idle: DEFAULT_SESSION_IDLE,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub trees: Arc<BTreeMap<String, DecisionTree>>,
    pub catalog: Arc<MetricCatalog>,
    pub store: Arc<dyn ScenarioStore>,
    pub sessions: Arc<SessionRegistry>,
}

impl AppState {
    pub fn new(config: &Config) -> Result<Self> {
        let mut trees = BTreeMap::new();
        for t in [DecisionTree::step_one(), DecisionTree::step_two()] {
            trees.insert(t.id.clone(), t);
        }
        for path in &config.trees {
            let t = DecisionTree::load(path)?;
            trees.insert(t.id.clone(), t);
        }
        let catalog = match &config.catalog {
            Some(p) => MetricCatalog::load(p)?,
            None => MetricCatalog::default_catalog(),
        };
        let store: Arc<dyn ScenarioStore> = match &config.store_dir {
            Some(dir) => Arc::new(FileStore::open(dir)?),
            None => Arc::new(MemoryStore::new()),
        };
        Ok(AppState {
            trees: Arc::new(trees),
            catalog: Arc::new(catalog),
            store,
            sessions: Arc::new(SessionRegistry::new(config.session_idle)),
        })
    }

    fn tree(&self, id: &str) -> Result<&DecisionTree> {
        self.trees.get(id).ok_or_else(|| Error::not_found("tree", id))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions/screening", post(start_screening))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/question", get(get_question))
        .route("/sessions/{id}/answers", post(post_answer))
        .route("/sessions/{id}/recommendations", get(get_recommendations))
        .route("/catalog", get(get_catalog))
        .route("/anp/priorities", post(anp_priorities))
        .route("/anp/consistency", post(anp_consistency))
        .route("/anp/weights", post(anp_weights))
        .route("/scenarios", post(create_scenario))
        .route("/scenarios/{id}", get(get_scenario).put(put_scenario))
        .route("/scenarios/{id}/valuations", post(valuation))
        .route("/scenarios/{id}/comparison", post(comparison))
        .route("/scenarios/{id}/what-if", post(what_if))
        .fallback(|uri: Uri| async move { ApiError(Error::not_found("route", uri.path())) })
        .with_state(state)
}

pub async fn serve(config: Config) -> Result<()> {
    let state = AppState::new(&config)?;
    let listener = tokio::net::TcpListener::bind(&config.addr).await?;
    eprintln!("datavalor listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

type Reply = std::result::Result<Response, ApiError>;

fn reply(status: StatusCode, json: String) -> Response {
    (status, [("content-type", "application/json")], json).into_response()
}

fn ok<T: Serialize>(value: &T) -> Reply {
    Ok(reply(StatusCode::OK, result_json(value)))
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T> {
    let s = text(body)?;
    // an empty body means "all defaults"
    parse_json(if s.trim().is_empty() { "{}" } else { s })
}

fn text(body: &Bytes) -> Result<&str> {
    std::str::from_utf8(body).map_err(|e| Error::invalid("", format!("body is not UTF-8: {e}")))
}

fn query<T>(q: std::result::Result<Query<T>, QueryRejection>) -> Result<T> {
    q.map(|Query(v)| v)
        .map_err(|e| Error::invalid("", format!("bad query string: {}", e.body_text())))
}

// screening sessions

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StartRequest {
    #[serde(default = "step_one")]
    tree_id: String,
}

fn step_one() -> String {
    "step1".into()
}

#[derive(Serialize)]
struct AnswerView<'a> {
    label: &'a str,
}

#[derive(Serialize)]
struct QuestionView<'a> {
    id: &'a str,
    text: &'a str,
    answers: Vec<AnswerView<'a>>,
}

impl<'a> From<&'a Question> for QuestionView<'a> {
    fn from(q: &'a Question) -> Self {
        QuestionView {
            id: &q.id,
            text: &q.text,
            answers: q.answers.iter().map(|a| AnswerView { label: &a.label }).collect(),
        }
    }
}

#[derive(Serialize)]
struct SessionView<'a> {
    session_id: &'a str,
    kind: SessionKind,
    tree_id: &'a str,
    created_at: u64,
    status: datavalor::screening::SessionStatus,
    answered: &'a [datavalor::screening::AnsweredQuestion],
    accumulated_codes: Vec<u32>,
    current_question: Option<QuestionView<'a>>,
}

fn session_view<'a>(e: &'a SessionEntry, tree: &'a DecisionTree) -> SessionView<'a> {
    SessionView {
        session_id: &e.session_id,
        kind: e.kind,
        tree_id: &e.screening.tree_id,
        created_at: e.created_at,
        status: e.screening.status,
        answered: &e.screening.answered,
        accumulated_codes: e.screening.accumulated_codes.iter().copied().collect(),
        current_question: e.screening.current_question(tree).map(QuestionView::from),
    }
}

async fn start_screening(State(st): State<AppState>, body: Bytes) -> Reply {
    let req: StartRequest = parse(&body)?;
    let tree = st.tree(&req.tree_id).map_err(|e| e.at("/tree_id"))?;
    let entry = st.sessions.create(start_session(tree)?);
    let e = entry.lock().await;
    Ok(reply(StatusCode::CREATED, result_json(&session_view(&e, tree))))
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> Reply {
    let entry = st.sessions.get(&id)?;
    let e = entry.lock().await;
    ok(&session_view(&e, st.tree(&e.screening.tree_id)?))
}

async fn get_question(State(st): State<AppState>, Path(id): Path<String>) -> Reply {
    #[derive(Serialize)]
    struct View<'a> {
        session_id: &'a str,
        status: datavalor::screening::SessionStatus,
        question: Option<QuestionView<'a>>,
    }
    let entry = st.sessions.get(&id)?;
    let e = entry.lock().await;
    let tree = st.tree(&e.screening.tree_id)?;
    ok(&View {
        session_id: &e.session_id,
        status: e.screening.status,
        question: e.screening.current_question(tree).map(QuestionView::from),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerRequest {
    question_id: String,
    answer_label: String,
}

async fn post_answer(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> Reply {
    let req: AnswerRequest = parse(&body)?;
    let entry = st.sessions.get(&id)?;
    // held across the update: answers to one session never interleave
    let mut e = entry.lock().await;
    let tree = st.tree(&e.screening.tree_id)?;
    e.screening = e.screening.answer(tree, &req.question_id, &req.answer_label)?;
    ok(&session_view(&e, tree))
}

async fn get_recommendations(State(st): State<AppState>, Path(id): Path<String>) -> Reply {
    let entry = st.sessions.get(&id)?;
    let e = entry.lock().await;
    let tree = st.tree(&e.screening.tree_id)?;
    ok(&e.screening.recommendations(tree)?)
}

// catalog

async fn get_catalog(
    State(st): State<AppState>,
    q: std::result::Result<Query<MetricFilter>, QueryRejection>,
) -> Reply {
    #[derive(Serialize)]
    struct View<'a> {
        version: &'a str,
        metrics: Vec<&'a datavalor::catalog::MetricDefinition>,
    }
    let filter = query(q)?;
    ok(&View {
        version: &st.catalog.version,
        metrics: st.catalog.find(&filter),
    })
}

// ANP

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRequest {
    #[serde(default)]
    items: Option<Vec<String>>,
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    method: PriorityMethod,
    #[serde(default)]
    threshold: Option<f64>,
}

impl MatrixRequest {
    fn pairwise(self) -> PairwiseMatrix {
        match self.items {
            Some(items) => PairwiseMatrix::new(items, self.matrix),
            None => PairwiseMatrix::unnamed(self.matrix),
        }
    }
}

async fn anp_priorities(body: Bytes) -> Reply {
    #[derive(Serialize)]
    struct View {
        method: PriorityMethod,
        priorities: datavalor::anp::PriorityVector,
        consistency: datavalor::anp::ConsistencyReport,
    }
    let req: MatrixRequest = parse(&body)?;
    let (method, threshold) = (req.method, req.threshold.unwrap_or(DEFAULT_CR_THRESHOLD));
    let m = req.pairwise();
    ok(&View {
        method,
        priorities: m.priorities(method)?,
        consistency: m.consistency_with(threshold)?,
    })
}

async fn anp_consistency(body: Bytes) -> Reply {
    let req: MatrixRequest = parse(&body)?;
    let threshold = req.threshold.unwrap_or(DEFAULT_CR_THRESHOLD);
    ok(&req.pairwise().consistency_with(threshold)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsRequest {
    judgements: JudgementSet,
    #[serde(default)]
    options: Option<DeriveOptions>,
}

async fn anp_weights(body: Bytes) -> Reply {
    let req: WeightsRequest = parse(&body)?;
    let opts = req.options.unwrap_or_default();
    Ok(reply(StatusCode::OK, ops::weigh(&req.judgements, &opts)?))
}

// scenarios

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CreateQuery {
    #[serde(default)]
    dry_run: bool,
}

async fn create_scenario(
    State(st): State<AppState>,
    q: std::result::Result<Query<CreateQuery>, QueryRejection>,
    body: Bytes,
) -> Reply {
    let q = query(q)?;
    let scenario = ValuationScenario::from_json(text(&body)?)?;
    if q.dry_run {
        return ok(&scenario);
    }
    st.store.put(&scenario)?;
    Ok(reply(StatusCode::CREATED, result_json(&scenario)))
}

async fn get_scenario(State(st): State<AppState>, Path(id): Path<String>) -> Reply {
    ok(&st.store.get(&id)?)
}

async fn put_scenario(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> Reply {
    let scenario = ValuationScenario::from_json(text(&body)?)?;
    if scenario.id != id {
        return Err(Error::invalid(
            "/id",
            format!("document id {:?} does not match {id:?}", scenario.id),
        )
        .into());
    }
    st.store.put(&scenario)?;
    ok(&scenario)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunQuery {
    candidate: Option<String>,
    paper_compat: Option<bool>,
}

impl RunQuery {
    fn candidate(&self) -> Result<&str> {
        self.candidate
            .as_deref()
            .ok_or_else(|| Error::invalid("?candidate", "candidate query parameter is required"))
    }
}

async fn valuation(
    State(st): State<AppState>,
    Path(id): Path<String>,
    q: std::result::Result<Query<RunQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    let scenario = st.store.get(&id)?;
    Ok(reply(StatusCode::OK, ops::value(&scenario, q.candidate()?, q.paper_compat)?))
}

async fn comparison(
    State(st): State<AppState>,
    Path(id): Path<String>,
    q: std::result::Result<Query<RunQuery>, QueryRejection>,
) -> Reply {
    let q = query(q)?;
    let scenario = st.store.get(&id)?;
    Ok(reply(StatusCode::OK, ops::comparison(&scenario, q.paper_compat)?))
}

async fn what_if(
    State(st): State<AppState>,
    Path(id): Path<String>,
    q: std::result::Result<Query<RunQuery>, QueryRejection>,
    body: Bytes,
) -> Reply {
    let q = query(q)?;
    let overrides = if body.iter().all(u8::is_ascii_whitespace) {
        Overrides::default()
    } else {
        Overrides::from_json(text(&body)?)?
    };
    let scenario = st.store.get(&id)?;
    let json = ops::what_if_report(&scenario, q.candidate()?, &overrides, q.paper_compat)?;
    Ok(reply(StatusCode::OK, json))
}
