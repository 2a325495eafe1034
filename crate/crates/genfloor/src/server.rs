//! JSON API over problems, layouts and optimization runs.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use genfloor_core::eval::{evaluate, EvaluationReport};
use genfloor_core::io::{history_csv, write_run_dir, FloorplanDoc, SolutionDoc};
use genfloor_core::model::{build_standard_tree, Problem, Representation};
use genfloor_core::perturb::{perturb, PermutationParams};
use genfloor_core::placement::place;
use genfloor_core::render::{render_bubble_svg, render_floorplan_svg, render_tree_svg, RenderKind, RenderSpec};
use genfloor_core::search::{nsga2_run, GAConfig, GenerationStats, RunOptions};
use genfloor_core::Error;

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl ApiError {
    fn invalid(msg: impl ToString) -> Self {
        ApiError(StatusCode::UNPROCESSABLE_ENTITY, msg.to_string())
    }

    fn not_found(what: &str, id: &str) -> Self {
        ApiError(StatusCode::NOT_FOUND, format!("unknown {what} `{id}`"))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            ApiError::invalid(e)
        } else {
            ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Done,
    Cancelled,
    Failed,
}

#[derive(Debug)]
struct Run {
    problem_id: String,
    config: GAConfig,
    status: RunStatus,
    history: Vec<GenerationStats>,
    solutions: Vec<String>,
    error: Option<String>,
    cancel: Arc<AtomicBool>,
}

#[derive(Debug, Clone)]
struct StoredSolution {
    problem_id: String,
    min_shared: i64,
    /// Serialized document, served verbatim.
    json: String,
    doc: FloorplanDoc,
}

#[derive(Default)]
struct Store {
    problems: HashMap<String, Problem>,
    runs: HashMap<String, Run>,
    solutions: HashMap<String, StoredSolution>,
    next_problem: usize,
    next_run: usize,
    next_generated: usize,
}

#[derive(Clone)]
pub struct AppState {
    store: Arc<Mutex<Store>>,
    state_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(state_dir: Option<PathBuf>) -> Self {
        AppState {
            store: Arc::default(),
            state_dir,
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Store> {
        self.store.lock().unwrap_or_else(|p| p.into_inner())
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/problems", post(create_problem))
        .route("/api/problems/{id}", get(get_problem))
        .route("/api/problems/{id}/generate", post(generate))
        .route("/api/problems/{id}/optimize", post(optimize))
        .route("/api/runs/{id}", get(get_run))
        .route("/api/runs/{id}/pareto", get(get_pareto))
        .route("/api/runs/{id}/cancel", post(cancel_run))
        .route("/api/solutions/{file}", get(get_solution))
        .with_state(state)
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(ApiError::invalid)
}

async fn create_problem(State(st): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let problem: Problem = parse_json(&body)?;
    let id = {
        let mut s = st.lock();
        s.next_problem += 1;
        let id = format!("p{}", s.next_problem);
        s.problems.insert(id.clone(), problem.clone());
        id
    };
    if let Some(dir) = &st.state_dir {
        let dir = dir.join("problems");
        fs::create_dir_all(&dir).map_err(Error::from)?;
        fs::write(dir.join(format!("{id}.json")), serde_json::to_string_pretty(&problem).map_err(Error::from)?)
            .map_err(Error::from)?;
    }
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "problem": problem }))))
}

fn problem(st: &AppState, id: &str) -> ApiResult<Problem> {
    st.lock()
        .problems
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::not_found("problem", id))
}

async fn get_problem(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Problem>> {
    Ok(Json(problem(&st, &id)?))
}

/// Parameters as the CLI string form or as the tagged JSON object.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ParamsInput {
    Text(String),
    Structured(PermutationParams),
}

#[derive(Debug, Deserialize)]
struct GenerateRequest {
    #[serde(default)]
    method: Option<Representation>,
    #[serde(default)]
    params: Option<ParamsInput>,
    #[serde(default)]
    rotations: Vec<bool>,
}

#[derive(Debug, Serialize)]
struct GenerateResponse {
    solution_id: String,
    floorplan: FloorplanDoc,
    evaluation: EvaluationReport,
}

async fn generate(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<GenerateResponse>> {
    let req: GenerateRequest = parse_json(&body)?;
    let mut p = problem(&st, &id)?;
    if let Some(m) = req.method {
        p = p.with_representation(m);
    }
    let method = p.representation();
    let params = match req.params {
        None => PermutationParams::identity(method, p.n()),
        Some(ParamsInput::Text(t)) => PermutationParams::parse(method, &t)?,
        Some(ParamsInput::Structured(s)) => s,
    };
    if params.representation() != method {
        return Err(ApiError::invalid(format!("parameters are for {}, not {method}", params.representation())));
    }
    params.validate(p.n())?;
    if !req.rotations.is_empty() && req.rotations.len() != p.n() {
        return Err(ApiError::invalid(format!("expected {} rotations, got {}", p.n(), req.rotations.len())));
    }
    let tree = perturb(&build_standard_tree(&p), &params)?;
    let fp = place(&tree, p.requirements(), &req.rotations);
    let evaluation = evaluate(&p, &fp, 0)?;
    let doc = FloorplanDoc::new(&p, &fp, Some(params));
    let sid = {
        let mut s = st.lock();
        s.next_generated += 1;
        let sid = format!("{id}-g{}", s.next_generated);
        s.solutions.insert(
            sid.clone(),
            StoredSolution {
                problem_id: id.clone(),
                min_shared: 0,
                json: doc.to_json(),
                doc: doc.clone(),
            },
        );
        sid
    };
    Ok(Json(GenerateResponse {
        solution_id: sid,
        floorplan: doc,
        evaluation,
    }))
}

async fn optimize(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let config: GAConfig = if body.iter().all(u8::is_ascii_whitespace) {
        GAConfig::default()
    } else {
        let mut v: Value = parse_json(&body)?;
        // allow partial configs
        let mut full = serde_json::to_value(GAConfig::default()).map_err(Error::from)?;
        if let (Some(obj), Some(patch)) = (full.as_object_mut(), v.as_object_mut()) {
            for (k, val) in std::mem::take(patch) {
                obj.insert(k, val);
            }
        } else {
            return Err(ApiError::invalid("config must be a JSON object"));
        }
        serde_json::from_value(full).map_err(ApiError::invalid)?
    };
    config.validate()?;
    let p = problem(&st, &id)?;
    let cancel = Arc::new(AtomicBool::new(false));
    let run_id = {
        let mut s = st.lock();
        s.next_run += 1;
        let run_id = format!("r{}", s.next_run);
        s.runs.insert(
            run_id.clone(),
            Run {
                problem_id: id.clone(),
                config: config.clone(),
                status: RunStatus::Running,
                history: Vec::new(),
                solutions: Vec::new(),
                error: None,
                cancel: cancel.clone(),
            },
        );
        run_id
    };
    let worker = st.clone();
    let rid = run_id.clone();
    tokio::task::spawn_blocking(move || execute_run(worker, rid, id, p, config, cancel));
    Ok((StatusCode::ACCEPTED, Json(json!({ "run_id": run_id }))))
}

fn execute_run(st: AppState, run_id: String, problem_id: String, p: Problem, config: GAConfig, cancel: Arc<AtomicBool>) {
    let observer_state = st.clone();
    let observer_id = run_id.clone();
    let observer_cancel = cancel.clone();
    let options = RunOptions {
        threads: None,
        observer: Some(Box::new(move |g: &GenerationStats| {
            if let Some(run) = observer_state.lock().runs.get_mut(&observer_id) {
                run.history.push(g.clone());
            }
            !observer_cancel.load(Ordering::SeqCst)
        })),
    };
    let outcome = nsga2_run(&p, &config, options);
    let mut s = st.lock();
    let mut stored = Vec::new();
    let status = match outcome {
        Ok(result) => {
            if let Some(dir) = &st.state_dir {
                if let Err(e) = write_run_dir(&dir.join("runs").join(&run_id), &p, &config, &result) {
                    log::warn!("run {run_id}: could not write artifacts: {e}");
                }
            }
            for (i, sol) in result.pareto.iter().enumerate() {
                let doc = SolutionDoc::new(&p, sol);
                let sid = format!("{run_id}-{i:03}");
                let json = serde_json::to_string_pretty(&doc).expect("solution documents serialize");
                s.solutions.insert(
                    sid.clone(),
                    StoredSolution {
                        problem_id: problem_id.clone(),
                        min_shared: config.min_shared,
                        json,
                        doc: doc.floorplan,
                    },
                );
                stored.push(sid);
            }
            if let Some(run) = s.runs.get_mut(&run_id) {
                run.history = result.history;
            }
            if result.cancelled {
                RunStatus::Cancelled
            } else {
                RunStatus::Done
            }
        }
        Err(e) => {
            if let Some(run) = s.runs.get_mut(&run_id) {
                run.error = Some(e.to_string());
            }
            RunStatus::Failed
        }
    };
    if let Some(run) = s.runs.get_mut(&run_id) {
        run.solutions = stored;
        run.status = status;
    }
}

async fn get_run(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = st.lock();
    let run = s.runs.get(&id).ok_or_else(|| ApiError::not_found("run", &id))?;
    Ok(Json(json!({
        "id": id,
        "problem_id": run.problem_id,
        "status": run.status,
        "config": run.config,
        "history": run.history,
        "history_csv": history_csv(&run.history),
        "solutions": run.solutions,
        "error": run.error,
    })))
}

async fn get_pareto(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = st.lock();
    let run = s.runs.get(&id).ok_or_else(|| ApiError::not_found("run", &id))?;
    if run.status == RunStatus::Running {
        return Err(ApiError(StatusCode::CONFLICT, format!("run `{id}` is still running")));
    }
    let items: Vec<Value> = run
        .solutions
        .iter()
        .map(|sid| {
            let mut v: Value = serde_json::from_str(&s.solutions[sid].json).expect("stored json parses");
            v["id"] = json!(sid);
            v
        })
        .collect();
    Ok(Json(Value::Array(items)))
}

async fn cancel_run(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = st.lock();
    let run = s.runs.get(&id).ok_or_else(|| ApiError::not_found("run", &id))?;
    run.cancel.store(true, Ordering::SeqCst);
    Ok(Json(json!({ "id": id, "status": run.status, "cancel_requested": true })))
}

#[derive(Debug, Deserialize)]
struct SvgQuery {
    #[serde(default)]
    kind: Option<String>,
    #[serde(default)]
    size: Option<u32>,
}

async fn get_solution(
    State(st): State<AppState>,
    Path(file): Path<String>,
    Query(q): Query<SvgQuery>,
) -> ApiResult<Response> {
    let (id, svg) = match file.strip_suffix(".svg") {
        Some(id) => (id.to_string(), true),
        None => (file.strip_suffix(".json").unwrap_or(&file).to_string(), false),
    };
    let (sol, p) = {
        let s = st.lock();
        let sol = s.solutions.get(&id).cloned().ok_or_else(|| ApiError::not_found("solution", &id))?;
        let p = s
            .problems
            .get(&sol.problem_id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("problem", &sol.problem_id))?;
        (sol, p)
    };
    if !svg {
        return Ok(([(header::CONTENT_TYPE, "application/json")], sol.json).into_response());
    }
    let kind: RenderKind = q.kind.as_deref().unwrap_or("floorplan").parse().map_err(ApiError::invalid)?;
    let mut spec = RenderSpec::new(kind);
    if let Some(size) = q.size {
        spec.size = size;
    }
    let p = p.with_representation(sol.doc.representation);
    let fp = sol.doc.floorplan(p.requirements())?;
    let body = match kind {
        RenderKind::Floorplan => render_floorplan_svg(&fp, p.requirements(), &spec)?,
        RenderKind::Bubble => render_bubble_svg(&fp, p.requirements(), p.goal_pairs(), sol.min_shared, &spec)?,
        RenderKind::Tree => render_tree_svg(&fp.tree, &spec)?,
    };
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], body).into_response())
}

/// Binds `port` and serves until the process ends.
pub async fn serve(port: u16, state_dir: Option<PathBuf>) -> std::io::Result<()> {
    if let Some(dir) = &state_dir {
        fs::create_dir_all(dir)?;
    }
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(state_dir))).await
}
