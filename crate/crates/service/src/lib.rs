//! Read-only HTTP API over a preprocessed workspace.
//!
//! All endpoints are `GET` and answer JSON. Selection-driven analyses
//! (generation graph, solution view, algorithm embedding) are computed on
//! first request and memoized; identical concurrent requests share one
//! computation.

mod error;

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, Method};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::Serialize;
use tokio::sync::OnceCell;
use tower_http::cors::{Any, CorsLayer};

use emoscope_core::analytics::embedding::{embed_algorithms, Embedding2D, EmbeddingMethod};
use emoscope_core::analytics::graph::{build_generation_graph, GraphParams};
use emoscope_core::analytics::pca::{project_reference_pca, Projection};
use emoscope_core::analytics::view::{
    sample_solution_view, DensityGrid, GenerationView, RefMode, SolutionViewConfig,
};
use emoscope_core::ingest::{RunSource, Workspace};
use emoscope_core::measures::{igd, GenerationProfile, Measure, MeasureSeries};
use emoscope_core::model::ProblemMeta;
use emoscope_core::similarity::{generation_label, SimilarityKind, SimilarityMatrix};
use emoscope_core::store::{
    algorithm_matrix, canonical_selection, generation_labels, generation_matrix, quality_table,
    QualityRow, StoredWorkspace,
};

pub use error::{ApiError, ErrorCode};

pub const MAX_GRAPH_NODES: usize = 2000;

type Memo = Mutex<HashMap<String, Arc<OnceCell<Result<Arc<Vec<u8>>, ApiError>>>>>;

/// Shared immutable workspace plus the memo of on-demand results.
pub struct AppState {
    pub stored: StoredWorkspace,
    pub projection: Projection,
    reference_bbox: BBox,
    memo: Memo,
    computations: AtomicUsize,
}

impl AppState {
    pub fn new(stored: StoredWorkspace) -> emoscope_core::Result<Self> {
        let projection = project_reference_pca(&stored.workspace.reference)?;
        let coords = projection.apply_all(stored.workspace.reference.points())?;
        Ok(Self {
            reference_bbox: BBox::of(&coords),
            projection,
            stored,
            memo: Mutex::new(HashMap::new()),
            computations: AtomicUsize::new(0),
        })
    }

    pub fn workspace(&self) -> &Workspace {
        &self.stored.workspace
    }

    /// Number of memoized computations actually executed.
    pub fn computations(&self) -> usize {
        self.computations.load(Ordering::SeqCst)
    }

    async fn memoized<F>(self: &Arc<Self>, key: String, compute: F) -> Result<Arc<Vec<u8>>, ApiError>
    where
        F: FnOnce(&AppState) -> Result<Vec<u8>, ApiError> + Send + 'static,
    {
        let cell = {
            let mut memo = self.memo.lock().expect("memo lock");
            memo.entry(key).or_default().clone()
        };
        let state = Arc::clone(self);
        cell.get_or_init(|| async move {
            let job = tokio::task::spawn_blocking(move || {
                state.computations.fetch_add(1, Ordering::SeqCst);
                compute(&state).map(Arc::new)
            });
            match job.await {
                Ok(r) => r,
                Err(e) => Err(ApiError::bad_param(format!("computation failed: {e}"))),
            }
        })
        .await
        .clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl BBox {
    fn of(points: &[[f64; 2]]) -> Self {
        let mut b = BBox {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        };
        for p in points {
            for k in 0..2 {
                b.min[k] = b.min[k].min(p[k]);
                b.max[k] = b.max[k].max(p[k]);
            }
        }
        b
    }

    fn contains(&self, other: &BBox) -> bool {
        (0..2).all(|k| other.min[k] >= self.min[k] && other.max[k] <= self.max[k])
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET])
        .allow_headers(Any);
    Router::new()
        .route("/api/health", get(health))
        .route("/api/workspace", get(workspace_summary))
        .route("/api/runs/{id}/measures", get(run_measures))
        .route("/api/runs/{id}/generations/{idx}", get(generation))
        .route("/api/similarity/algorithms", get(algorithm_similarity))
        .route("/api/analysis/generation-graph", get(generation_graph))
        .route("/api/analysis/solution-view", get(solution_view))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(middleware::from_fn(log_request))
        .layer(cors)
        .with_state(state)
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let uri = req.uri().clone();
    let res = next.run(req).await;
    log::info!("{method} {uri} -> {}", res.status().as_u16());
    res
}

/// Binds `addr` and serves until the future is dropped or fails.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving {} on http://{}", state.stored.dir.display(), listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

fn json_bytes(bytes: Arc<Vec<u8>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes.as_ref().clone()).into_response()
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, ApiError> {
    serde_json::to_vec(value).map_err(|e| ApiError::bad_param(format!("serialization failed: {e}")))
}

fn respond<T: Serialize>(value: &T) -> Result<Response, ApiError> {
    Ok(json_bytes(Arc::new(to_json(value)?)))
}

type Params = Query<HashMap<String, String>>;

fn reject_unknown(params: &HashMap<String, String>, allowed: &[&str]) -> Result<(), ApiError> {
    let mut keys: Vec<&String> = params.keys().filter(|k| !allowed.contains(&k.as_str())).collect();
    keys.sort();
    match keys.first() {
        Some(k) => Err(ApiError::bad_param(format!("unknown parameter {k:?}"))),
        None => Ok(()),
    }
}

fn parse_param<T: std::str::FromStr>(
    params: &HashMap<String, String>,
    name: &str,
) -> Result<Option<T>, ApiError> {
    params
        .get(name)
        .map(|v| {
            v.parse()
                .map_err(|_| ApiError::bad_param(format!("invalid {name} {v:?}")))
        })
        .transpose()
}

async fn health() -> Result<Response, ApiError> {
    respond(&serde_json::json!({"status": "ok"}))
}

#[derive(Debug, Serialize)]
struct AlgorithmSummary {
    id: String,
    source: RunSource,
    generations: usize,
    original_generations: usize,
}

#[derive(Debug, Serialize)]
struct WorkspaceSummary<'a> {
    problem: &'a ProblemMeta,
    m: usize,
    d: Option<usize>,
    reference_points: usize,
    hv_anchor: Vec<f64>,
    normalize: bool,
    sample_target: Option<usize>,
    algorithms: Vec<AlgorithmSummary>,
    quality: Vec<QualityRow>,
    similarity_kinds: Vec<&'static str>,
}

async fn workspace_summary(
    State(state): State<Arc<AppState>>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    reject_unknown(&params, &["sort"])?;
    let sort = match params.get("sort").map(String::as_str) {
        None => false,
        Some("best_igd") => true,
        Some(other) => return Err(ApiError::bad_param(format!("unsupported sort {other:?}"))),
    };
    let ws = state.workspace();
    let originals: BTreeMap<&str, usize> = state
        .stored
        .manifest
        .runs
        .iter()
        .map(|r| (r.id.as_str(), r.original_generations))
        .collect();
    let algorithms = ws
        .runs
        .iter()
        .map(|r| AlgorithmSummary {
            id: r.algorithm_id.clone(),
            source: r.source,
            generations: r.len(),
            original_generations: originals.get(r.algorithm_id.as_str()).copied().unwrap_or(r.len()),
        })
        .collect();
    respond(&WorkspaceSummary {
        problem: &ws.problem,
        m: ws.problem.m,
        d: ws.problem.d,
        reference_points: ws.reference.len(),
        hv_anchor: ws.measure_config.hv_anchor.to_vec(),
        normalize: ws.normalize,
        sample_target: state.stored.manifest.sample_target,
        algorithms,
        quality: quality_table(ws, sort)?,
        similarity_kinds: SimilarityKind::ALL.iter().map(|k| k.as_str()).collect(),
    })
}

fn series_of<'a>(ws: &'a Workspace, id: &str) -> Result<&'a MeasureSeries, ApiError> {
    ws.measures
        .get(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown run {id:?}")))
}

async fn run_measures(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    reject_unknown(&params, &["gen"])?;
    let ws = state.workspace();
    let series = series_of(ws, &id)?;
    let Some(gen) = parse_param::<usize>(&params, "gen")? else {
        return respond(series);
    };
    let run = ws.run(&id).expect("series implies run");
    let record = run
        .generation(gen)
        .ok_or_else(|| ApiError::not_found(format!("run {id:?} has no generation {gen}")))?;
    let mut out = series.clone();
    if !out.igd_profiles.iter().any(|p| p.gen == gen) {
        let solutions = match ws.normalizer() {
            Some(n) => igd(&n.apply(&record.solutions), &n.apply_reference(&ws.reference))?,
            None => igd(&record.solutions, &ws.reference)?,
        };
        out.igd_profiles.push(GenerationProfile {
            gen,
            distances: solutions.distances,
        });
        out.igd_profiles.sort_by_key(|p| p.gen);
    }
    respond(&out)
}

#[derive(Debug, Serialize)]
struct GenerationPayload {
    run_id: String,
    gen: usize,
    label: String,
    objectives: Vec<Vec<f64>>,
    coords: Vec<[f64; 2]>,
    measures: BTreeMap<&'static str, f64>,
    projection: Projection,
    bbox: BBox,
    reference_bbox: BBox,
    /// True when some projected point lies outside the reference extent.
    out_of_viewport: bool,
}

async fn generation(
    State(state): State<Arc<AppState>>,
    Path((id, idx)): Path<(String, String)>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    reject_unknown(&params, &[])?;
    let ws = state.workspace();
    let series = series_of(ws, &id)?;
    let gen: usize = idx
        .parse()
        .map_err(|_| ApiError::bad_param(format!("invalid generation index {idx:?}")))?;
    let run = ws.run(&id).expect("series implies run");
    let record = run
        .generation(gen)
        .ok_or_else(|| ApiError::not_found(format!("run {id:?} has no generation {gen}")))?;
    let objectives: Vec<Vec<f64>> = record.solutions.objectives().iter().map(|o| o.to_vec()).collect();
    let coords = state.projection.apply_all(record.solutions.objectives())?;
    let bbox = BBox::of(&coords);
    let measures = Measure::ALL
        .iter()
        .map(|&m| (m.as_str(), series.value_at(m, gen).expect("series covers the run")))
        .collect();
    respond(&GenerationPayload {
        run_id: id.clone(),
        gen,
        label: generation_label(&id, gen),
        objectives,
        coords,
        measures,
        projection: state.projection.clone(),
        out_of_viewport: !state.reference_bbox.contains(&bbox),
        bbox,
        reference_bbox: state.reference_bbox,
    })
}

#[derive(Debug, Serialize)]
struct AlgorithmSimilarity {
    matrix: SimilarityMatrix,
    /// Absent for a single-run workspace.
    embedding: Option<Embedding2D>,
}

async fn algorithm_similarity(
    State(state): State<Arc<AppState>>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    reject_unknown(&params, &["kind", "method"])?;
    let kind_str = params
        .get("kind")
        .ok_or_else(|| ApiError::bad_param("missing kind"))?;
    let kind = SimilarityKind::parse(kind_str).map_err(ApiError::from)?;
    if kind == SimilarityKind::GenEmd {
        return Err(ApiError::bad_param(
            "gen_emd is generation-level; use /api/analysis/generation-graph",
        ));
    }
    let method = match params.get("method") {
        None => EmbeddingMethod::MetricMds,
        Some(m) => EmbeddingMethod::parse(m)
            .ok_or_else(|| ApiError::bad_param(format!("unknown embedding method {m:?}")))?,
    };
    let key = format!("similarity?kind={}&method={method:?}", kind.as_str());
    let bytes = state
        .memoized(key, move |st| {
            let matrix = algorithm_matrix(st.workspace(), kind)?;
            let embedding = if matrix.len() >= 2 {
                Some(embed_algorithms(&matrix, method)?)
            } else {
                None
            };
            to_json(&AlgorithmSimilarity { matrix, embedding })
        })
        .await?;
    Ok(json_bytes(bytes))
}

async fn generation_graph(
    State(state): State<Arc<AppState>>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    reject_unknown(&params, &["runs", "k", "size"])?;
    let ws = state.workspace();
    let runs_param = params
        .get("runs")
        .ok_or_else(|| ApiError::bad_param("missing runs"))?;
    let requested: Vec<&str> = runs_param.split(',').filter(|s| !s.is_empty()).collect();
    if requested.is_empty() {
        return Err(ApiError::bad_param("runs is empty"));
    }
    let selection = canonical_selection(ws, &requested)?;
    let k = parse_param::<usize>(&params, "k")?.unwrap_or(GraphParams::default().k);
    let size_measure = match params.get("size") {
        None => Measure::Igd,
        Some(s) => Measure::parse(s).ok_or_else(|| ApiError::bad_param(format!("unknown measure {s:?}")))?,
    };
    let nodes = generation_labels(ws, &selection).len();
    if nodes > MAX_GRAPH_NODES {
        return Err(ApiError::too_large(format!(
            "{nodes} generations selected; the graph is limited to {MAX_GRAPH_NODES}"
        )));
    }
    if k == 0 || k >= nodes {
        return Err(ApiError::bad_param(format!(
            "k must satisfy 1 <= k < {nodes}, got {k}"
        )));
    }
    let key = format!(
        "graph?runs={}&k={k}&size={}",
        selection.join(","),
        size_measure.as_str()
    );
    let bytes = state
        .memoized(key, move |st| {
            let ws = st.workspace();
            let matrix = generation_matrix(ws, &selection)?;
            let params = GraphParams {
                k,
                size_measure,
                ..GraphParams::default()
            };
            to_json(&build_generation_graph(&matrix, &ws.measures, &params)?)
        })
        .await?;
    Ok(json_bytes(bytes))
}

#[derive(Debug, Serialize)]
struct ReferencePayload {
    mode: RefMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    scatter: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<DensityGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hull: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize)]
struct SolutionViewPayload {
    rate: f64,
    generations: Vec<GenerationView>,
    reference: ReferencePayload,
}

fn parse_selection(ws: &Workspace, sel: &str) -> Result<Vec<(String, usize)>, ApiError> {
    let mut out = Vec::new();
    for item in sel.split(',').filter(|s| !s.is_empty()) {
        let (id, gen) = item
            .rsplit_once(':')
            .ok_or_else(|| ApiError::bad_param(format!("selection {item:?} is not run:gen")))?;
        let gen: usize = gen
            .parse()
            .map_err(|_| ApiError::bad_param(format!("invalid generation in {item:?}")))?;
        let run = ws
            .run(id)
            .ok_or_else(|| ApiError::bad_param(format!("unknown run {id:?}")))?;
        if run.generation(gen).is_none() {
            return Err(ApiError::bad_param(format!("run {id:?} has no generation {gen}")));
        }
        out.push((id.to_string(), gen));
    }
    if out.is_empty() {
        return Err(ApiError::bad_param("empty selection"));
    }
    Ok(out)
}

async fn solution_view(
    State(state): State<Arc<AppState>>,
    Query(params): Params,
) -> Result<Response, ApiError> {
    reject_unknown(&params, &["sel", "rate", "refmode"])?;
    let ws = state.workspace();
    let sel = params
        .get("sel")
        .ok_or_else(|| ApiError::bad_param("missing sel"))?;
    let selection = parse_selection(ws, sel)?;
    let rate = parse_param::<f64>(&params, "rate")?.unwrap_or(1.0);
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(ApiError::bad_param(format!("rate must be in (0, 1], got {rate}")));
    }
    let refmode = match params.get("refmode") {
        None => RefMode::Scatter,
        Some(m) => RefMode::parse(m).ok_or_else(|| ApiError::bad_param(format!("unknown refmode {m:?}")))?,
    };
    let sel_key: Vec<String> = selection.iter().map(|(id, g)| format!("{id}:{g}")).collect();
    let key = format!("view?sel={}&rate={:?}&refmode={refmode:?}", sel_key.join(","), rate);
    let bytes = state
        .memoized(key, move |st| {
            let ws = st.workspace();
            let sets: Vec<(String, &_)> = selection
                .iter()
                .map(|(id, g)| {
                    let rec = ws.run(id).and_then(|r| r.generation(*g)).expect("validated");
                    (generation_label(id, *g), &rec.solutions)
                })
                .collect();
            let model = sample_solution_view(
                &sets,
                &ws.reference,
                &st.projection,
                rate,
                &SolutionViewConfig::default(),
            )?;
            let modes = model.reference_modes;
            let reference = ReferencePayload {
                mode: refmode,
                scatter: (refmode == RefMode::Scatter).then_some(modes.scatter),
                density: (refmode == RefMode::Density).then_some(modes.density),
                hull: (refmode == RefMode::Hull).then_some(modes.hull),
            };
            to_json(&SolutionViewPayload {
                rate,
                generations: model.generations,
                reference,
            })
        })
        .await?;
    Ok(json_bytes(bytes))
}
