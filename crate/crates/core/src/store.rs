//! On-disk workspace: layout, preprocessing with content-hashed caches, and
//! loading for serving and reporting.
//!
//! ```text
//! <dir>/workspace.json            meta, run index, settings, cache index
//! <dir>/reference.csv
//! <dir>/runs/<id>.jsonl
//! <dir>/cache/measures/<id>.json
//! <dir>/cache/sim/<kind>.json     algorithm-level matrices
//! <dir>/cache/sim/gen_emd-<h>.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmarks::{by_name, default_divisions, reference_set};
use crate::error::{Error, Result};
use crate::ingest::{
    build_workspace, downsample, parse_run_log, read_reference_csv, write_reference_csv,
    AlgorithmRun, RunSource, Workspace,
};
use crate::measures::{Measure, MeasureConfig, MeasureSeries};
use crate::model::{ObjectiveVector, ProblemMeta, ReferenceSet};
use crate::similarity::{
    algorithm_similarity_matrix, cache_key, generation_label, generation_similarity_matrix_with,
    SimilarityKind, SimilarityMatrix,
};

pub const MANIFEST_FILE: &str = "workspace.json";
pub const REFERENCE_FILE: &str = "reference.csv";
pub const RUNS_DIR: &str = "runs";
pub const WORKSPACE_SCHEMA: &str = "emoscope-workspace/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub id: String,
    pub file: String,
    pub sha256: String,
    pub source: RunSource,
    pub original_generations: usize,
    pub kept_generations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub file: String,
    pub input_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEntry {
    pub kind: SimilarityKind,
    /// Runs whose generations (gen_emd) or algorithms the matrix covers.
    pub runs: Vec<String>,
    pub file: String,
    pub input_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceManifest {
    pub schema: String,
    pub problem: ProblemMeta,
    pub hv_anchor: Vec<f64>,
    #[serde(default)]
    pub normalize: bool,
    pub sample_target: Option<usize>,
    pub reference_sha256: String,
    pub runs: Vec<RunEntry>,
    #[serde(default)]
    pub measures: BTreeMap<String, CacheEntry>,
    /// Keyed by matrix cache key.
    #[serde(default)]
    pub similarity: BTreeMap<String, SimEntry>,
}

/// What `preprocess` should compute beyond measures and algorithm matrices.
#[derive(Debug, Clone, Default)]
pub struct PreprocessOptions {
    pub sample_target: Option<usize>,
    pub pairs: Vec<(String, String)>,
    pub all_pairs: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreprocessSummary {
    pub runs: usize,
    pub measures_computed: usize,
    pub measures_reused: usize,
    pub sim_computed: usize,
    pub sim_reused: usize,
    pub reference_generated: bool,
    pub files_written: usize,
}

/// Serialized measures cache: the series plus its input hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MeasureCacheFile {
    #[serde(flatten)]
    series: MeasureSeries,
    input_hash: String,
}

/// A workspace read from disk together with its manifest.
#[derive(Debug, Clone)]
pub struct StoredWorkspace {
    pub dir: PathBuf,
    pub manifest: WorkspaceManifest,
    pub workspace: Workspace,
}

fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

/// Writes only when the content differs; returns whether it wrote.
fn write_if_changed(path: &Path, bytes: &[u8]) -> Result<bool> {
    if let Ok(existing) = fs::read(path) {
        if existing == bytes {
            return Ok(false);
        }
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(true)
}

fn to_json_line<T: Serialize>(value: &T, pretty: bool) -> Result<Vec<u8>> {
    let mut bytes = if pretty {
        serde_json::to_vec_pretty(value)?
    } else {
        serde_json::to_vec(value)?
    };
    bytes.push(b'\n');
    Ok(bytes)
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id != "."
        && id != ".."
        && !id.contains(['/', '\\', ':', ','])
        && !id.chars().any(char::is_control);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "algorithm id {id:?} cannot name a cache file or selection"
        )))
    }
}

/// Everything derived from the input files before any cache is consulted.
struct Inputs {
    problem: ProblemMeta,
    reference: ReferenceSet,
    reference_sha: String,
    reference_bytes: Option<Vec<u8>>,
    entries: Vec<RunEntry>,
    runs: Vec<AlgorithmRun>,
}

fn gather(dir: &Path, sample_target: Option<usize>) -> Result<Inputs> {
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    let runs_dir = dir.join(RUNS_DIR);
    let listing = fs::read_dir(&runs_dir).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(runs_dir.clone())
        } else {
            Error::io(&runs_dir, e)
        }
    })?;
    let mut files: Vec<PathBuf> = listing
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no run logs (*.jsonl) under {}",
            runs_dir.display()
        )));
    }

    let mut entries = Vec::new();
    let mut runs = Vec::new();
    for path in &files {
        let bytes = read_bytes(path)?;
        let run = parse_run_log(BufReader::new(&bytes[..])).map_err(|e| {
            Error::InvalidInput(format!("{}: {e}", path.display()))
        })?;
        check_id(&run.algorithm_id)?;
        let original = run.len();
        let run = match sample_target {
            Some(t) => downsample(&run, t)?,
            None => run,
        };
        let name = path.file_name().expect("listed file").to_string_lossy();
        entries.push(RunEntry {
            id: run.algorithm_id.clone(),
            file: format!("{RUNS_DIR}/{name}"),
            sha256: sha256_hex(&[&bytes]),
            source: run.source,
            original_generations: original,
            kept_generations: run.len(),
        });
        runs.push(run);
    }

    let first = &runs[0];
    let m = first.m();
    for run in &runs[1..] {
        if run.problem != first.problem {
            return Err(Error::InvalidInput(format!(
                "runs disagree on the problem: {} vs {}",
                first.problem, run.problem
            )));
        }
        Error::check_dim(m, run.m())?;
    }
    let builtin = by_name(&first.problem, m).ok();
    let problem = match &builtin {
        Some(p) => p.meta().clone(),
        None => ProblemMeta::new(first.problem.clone(), m, first.decision_dim, Vec::new())?,
    };

    let ref_path = dir.join(REFERENCE_FILE);
    let (reference, reference_bytes) = if ref_path.exists() {
        let bytes = read_bytes(&ref_path)?;
        (read_reference_csv(&bytes[..])?, Some(bytes))
    } else if let Some(p) = &builtin {
        (reference_set(p, default_divisions(m))?, None)
    } else {
        return Err(Error::MissingFile(ref_path));
    };
    let csv = match &reference_bytes {
        Some(b) => b.clone(),
        None => {
            let mut buf = Vec::new();
            write_reference_csv(&reference, &mut buf)?;
            buf
        }
    };
    Ok(Inputs {
        problem,
        reference,
        reference_sha: sha256_hex(&[&csv]),
        reference_bytes: if reference_bytes.is_some() { None } else { Some(csv) },
        entries,
        runs,
    })
}

fn read_manifest(dir: &Path) -> Result<Option<WorkspaceManifest>> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let bytes = read_bytes(&path)?;
    let manifest: WorkspaceManifest = serde_json::from_slice(&bytes)?;
    if manifest.schema != WORKSPACE_SCHEMA {
        return Err(Error::Schema {
            line: 1,
            message: format!("unsupported workspace schema {:?}", manifest.schema),
        });
    }
    Ok(Some(manifest))
}

/// The settings that every cache depends on, as hashable bytes.
fn settings_bytes(ws: &Workspace, sample_target: Option<usize>) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(&(
        sample_target,
        ws.normalize,
        &ws.measure_config,
    ))?)
}

struct Hashes {
    measures: BTreeMap<String, String>,
    settings: Vec<u8>,
    reference: String,
    runs: BTreeMap<String, String>,
}

impl Hashes {
    fn new(ws: &Workspace, inputs: &Inputs, sample_target: Option<usize>) -> Result<Self> {
        let settings = settings_bytes(ws, sample_target)?;
        let runs: BTreeMap<String, String> = inputs
            .entries
            .iter()
            .map(|e| (e.id.clone(), e.sha256.clone()))
            .collect();
        let measures = runs
            .iter()
            .map(|(id, sha)| {
                let h = sha256_hex(&[
                    b"measures",
                    sha.as_bytes(),
                    inputs.reference_sha.as_bytes(),
                    &settings,
                ]);
                (id.clone(), h)
            })
            .collect();
        Ok(Self {
            measures,
            settings,
            reference: inputs.reference_sha.clone(),
            runs,
        })
    }

    fn algorithm(&self, kind: SimilarityKind, ids: &[String]) -> String {
        let mut parts: Vec<&[u8]> = vec![kind.as_str().as_bytes()];
        for id in ids {
            parts.push(self.measures[id].as_bytes());
        }
        sha256_hex(&parts)
    }

    fn generations(&self, ids: &[String]) -> String {
        let mut parts: Vec<&[u8]> = vec![
            b"gen_emd",
            self.reference.as_bytes(),
            &self.settings,
        ];
        for id in ids {
            parts.push(self.runs[id].as_bytes());
        }
        sha256_hex(&parts)
    }
}

fn workspace_from(inputs: &Inputs, previous: Option<&WorkspaceManifest>) -> Result<Workspace> {
    let mut ws = build_workspace(
        inputs.problem.clone(),
        inputs.reference.clone(),
        inputs.runs.clone(),
    )?;
    if let Some(prev) = previous {
        ws.normalize = prev.normalize;
        // a stored anchor survives as long as the reference is unchanged
        if prev.reference_sha256 == inputs.reference_sha && prev.hv_anchor.len() == inputs.problem.m {
            ws.measure_config = MeasureConfig::new(ObjectiveVector::new(prev.hv_anchor.clone())?);
        }
    }
    Ok(ws)
}

fn measures_path(id: &str) -> String {
    format!("cache/measures/{id}.json")
}

fn sim_path(key: &str, kind: SimilarityKind) -> String {
    match kind {
        SimilarityKind::GenEmd => format!("cache/sim/{key}.json"),
        k => format!("cache/sim/{}.json", k.as_str()),
    }
}

fn load_measures(dir: &Path, entry: &CacheEntry, expected: &str) -> Option<MeasureSeries> {
    if entry.input_hash != expected {
        return None;
    }
    let bytes = fs::read(dir.join(&entry.file)).ok()?;
    let file: MeasureCacheFile = serde_json::from_slice(&bytes).ok()?;
    (file.input_hash == expected).then_some(file.series)
}

fn load_matrix(dir: &Path, entry: &SimEntry, expected: &str) -> Option<SimilarityMatrix> {
    if entry.input_hash != expected {
        return None;
    }
    let bytes = fs::read(dir.join(&entry.file)).ok()?;
    let m: SimilarityMatrix = serde_json::from_slice(&bytes).ok()?;
    SimilarityMatrix::new(m.kind, m.labels, m.values).ok()
}

/// Orders a run selection as the workspace does and removes duplicates.
pub fn canonical_selection(ws: &Workspace, ids: &[&str]) -> Result<Vec<String>> {
    for id in ids {
        if ws.run(id).is_none() {
            return Err(Error::InvalidInput(format!("unknown run {id:?}")));
        }
    }
    Ok(ws
        .runs
        .iter()
        .map(|r| r.algorithm_id.clone())
        .filter(|id| ids.contains(&id.as_str()))
        .collect())
}

/// Labels of the generation matrix over `ids`, in canonical order.
pub fn generation_labels(ws: &Workspace, ids: &[String]) -> Vec<String> {
    ids.iter()
        .filter_map(|id| ws.run(id))
        .flat_map(|r| r.generations().iter().map(|g| generation_label(&r.algorithm_id, g.index)))
        .collect()
}

/// Generation EMD matrix over a run selection: served from `ws.sim_cache`
/// when a cached matrix covers the labels, computed otherwise.
pub fn generation_matrix(ws: &Workspace, ids: &[String]) -> Result<SimilarityMatrix> {
    let labels = generation_labels(ws, ids);
    let key = cache_key(SimilarityKind::GenEmd, &labels);
    if let Some(m) = ws.sim_cache.get(&key) {
        return Ok(m.clone());
    }
    for m in ws.sim_cache.values() {
        if m.kind == SimilarityKind::GenEmd {
            if let Some(sub) = m.submatrix(&labels) {
                return Ok(sub);
            }
        }
    }
    let runs: Vec<&AlgorithmRun> = ids.iter().filter_map(|id| ws.run(id)).collect();
    generation_similarity_matrix_with(&runs, ws.normalizer().as_ref())
}

/// Algorithm-level matrix of `kind`, from cache when present.
pub fn algorithm_matrix(ws: &Workspace, kind: SimilarityKind) -> Result<SimilarityMatrix> {
    let labels: Vec<String> = ws.runs.iter().map(|r| r.algorithm_id.clone()).collect();
    if let Some(m) = ws.sim_cache.get(&cache_key(kind, &labels)) {
        return Ok(m.clone());
    }
    algorithm_similarity_matrix(ws, kind)
}

/// Populates the caches of the workspace at `dir`.
pub fn preprocess(dir: &Path, opts: &PreprocessOptions) -> Result<PreprocessSummary> {
    let previous = read_manifest(dir)?;
    let sample_target = opts
        .sample_target
        .or_else(|| previous.as_ref().and_then(|m| m.sample_target));
    let inputs = gather(dir, sample_target)?;
    let mut summary = PreprocessSummary {
        runs: inputs.runs.len(),
        ..Default::default()
    };
    if let Some(bytes) = &inputs.reference_bytes {
        write_if_changed(&dir.join(REFERENCE_FILE), bytes)?;
        summary.reference_generated = true;
        summary.files_written += 1;
    }
    let mut ws = workspace_from(&inputs, previous.as_ref())?;
    let hashes = Hashes::new(&ws, &inputs, sample_target)?;
    let empty_manifest_measures = BTreeMap::new();
    let empty_manifest_sim = BTreeMap::new();
    let prev_measures = previous.as_ref().map_or(&empty_manifest_measures, |m| &m.measures);
    let prev_sim = previous.as_ref().map_or(&empty_manifest_sim, |m| &m.similarity);

    let mut measure_index = BTreeMap::new();
    for run in &ws.runs {
        let id = &run.algorithm_id;
        let expected = &hashes.measures[id];
        let cached = prev_measures
            .get(id)
            .and_then(|e| load_measures(dir, e, expected));
        let series = match cached {
            Some(s) => {
                summary.measures_reused += 1;
                s
            }
            None => {
                log::info!("computing measures for {id}");
                summary.measures_computed += 1;
                ws.measure(run)?
            }
        };
        let file = measures_path(id);
        let bytes = to_json_line(
            &MeasureCacheFile {
                series: series.clone(),
                input_hash: expected.clone(),
            },
            false,
        )?;
        if write_if_changed(&dir.join(&file), &bytes)? {
            summary.files_written += 1;
        }
        measure_index.insert(
            id.clone(),
            CacheEntry {
                file,
                input_hash: expected.clone(),
            },
        );
        ws.measures.insert(id.clone(), series);
    }

    let ids: Vec<String> = ws.runs.iter().map(|r| r.algorithm_id.clone()).collect();
    let mut sim_index = BTreeMap::new();
    for kind in SimilarityKind::ALGORITHM {
        let expected = hashes.algorithm(kind, &ids);
        let key = cache_key(kind, &ids);
        let cached = prev_sim.get(&key).and_then(|e| load_matrix(dir, e, &expected));
        let matrix = match cached {
            Some(m) => {
                summary.sim_reused += 1;
                m
            }
            None => {
                log::info!("computing {} matrix", kind.as_str());
                summary.sim_computed += 1;
                algorithm_similarity_matrix(&ws, kind)?
            }
        };
        let file = sim_path(&key, kind);
        if write_if_changed(&dir.join(&file), &to_json_line(&matrix, false)?)? {
            summary.files_written += 1;
        }
        sim_index.insert(
            key,
            SimEntry {
                kind,
                runs: ids.clone(),
                file,
                input_hash: expected,
            },
        );
    }

    // generation matrices: previously cached ones stay when still valid
    let mut selections: Vec<Vec<String>> = Vec::new();
    for entry in prev_sim.values() {
        if entry.kind == SimilarityKind::GenEmd && entry.runs.iter().all(|id| ws.run(id).is_some()) {
            selections.push(entry.runs.clone());
        }
    }
    if opts.all_pairs {
        let n = ids.len();
        log::warn!(
            "computing generation EMD for all {} run pairs; cost grows quadratically with generations",
            n * (n - 1) / 2
        );
        for i in 0..n {
            for j in (i + 1)..n {
                selections.push(vec![ids[i].clone(), ids[j].clone()]);
            }
        }
    }
    for (a, b) in &opts.pairs {
        selections.push(canonical_selection(&ws, &[a.as_str(), b.as_str()])?);
    }
    selections.sort();
    selections.dedup();
    for sel in selections {
        let labels = generation_labels(&ws, &sel);
        let key = cache_key(SimilarityKind::GenEmd, &labels);
        let expected = hashes.generations(&sel);
        let cached = prev_sim.get(&key).and_then(|e| load_matrix(dir, e, &expected));
        let matrix = match cached {
            Some(m) => {
                summary.sim_reused += 1;
                m
            }
            None => {
                let is_request = opts.all_pairs
                    || opts
                        .pairs
                        .iter()
                        .any(|(a, b)| canonical_selection(&ws, &[a, b]).ok().as_ref() == Some(&sel));
                if !is_request {
                    // stale entry not asked for again
                    continue;
                }
                log::info!("computing generation EMD for {}", sel.join(","));
                summary.sim_computed += 1;
                let runs: Vec<&AlgorithmRun> = sel.iter().filter_map(|id| ws.run(id)).collect();
                generation_similarity_matrix_with(&runs, ws.normalizer().as_ref())?
            }
        };
        let file = sim_path(&key, SimilarityKind::GenEmd);
        if write_if_changed(&dir.join(&file), &to_json_line(&matrix, false)?)? {
            summary.files_written += 1;
        }
        sim_index.insert(
            key,
            SimEntry {
                kind: SimilarityKind::GenEmd,
                runs: sel,
                file,
                input_hash: expected,
            },
        );
    }

    let manifest = WorkspaceManifest {
        schema: WORKSPACE_SCHEMA.into(),
        problem: ws.problem.clone(),
        hv_anchor: ws.measure_config.hv_anchor.to_vec(),
        normalize: ws.normalize,
        sample_target,
        reference_sha256: inputs.reference_sha.clone(),
        runs: inputs.entries.clone(),
        measures: measure_index,
        similarity: sim_index,
    };
    if write_if_changed(&dir.join(MANIFEST_FILE), &to_json_line(&manifest, true)?)? {
        summary.files_written += 1;
    }
    Ok(summary)
}

/// Reads a workspace for serving. Caches that are missing or stale are
/// recomputed in memory with a warning; nothing is written.
pub fn load_workspace(dir: &Path) -> Result<StoredWorkspace> {
    let previous = read_manifest(dir)?;
    let sample_target = previous.as_ref().and_then(|m| m.sample_target);
    let inputs = gather(dir, sample_target)?;
    let mut ws = workspace_from(&inputs, previous.as_ref())?;
    let hashes = Hashes::new(&ws, &inputs, sample_target)?;
    let empty = WorkspaceManifest {
        schema: WORKSPACE_SCHEMA.into(),
        problem: ws.problem.clone(),
        hv_anchor: ws.measure_config.hv_anchor.to_vec(),
        normalize: ws.normalize,
        sample_target,
        reference_sha256: inputs.reference_sha.clone(),
        runs: inputs.entries.clone(),
        measures: BTreeMap::new(),
        similarity: BTreeMap::new(),
    };
    let manifest = previous.unwrap_or(empty);

    let mut stale = Vec::new();
    for run in &ws.runs {
        let id = &run.algorithm_id;
        let cached = manifest
            .measures
            .get(id)
            .and_then(|e| load_measures(dir, e, &hashes.measures[id]));
        let series = match cached {
            Some(s) => s,
            None => {
                stale.push(id.clone());
                ws.measure(run)?
            }
        };
        ws.measures.insert(id.clone(), series);
    }
    if !stale.is_empty() {
        log::warn!(
            "measure caches missing or stale for {}; computed in memory (run preprocess to persist)",
            stale.join(", ")
        );
    }
    let ids: Vec<String> = ws.runs.iter().map(|r| r.algorithm_id.clone()).collect();
    for (key, entry) in &manifest.similarity {
        if entry.runs.iter().any(|id| ws.run(id).is_none()) {
            continue;
        }
        let expected = match entry.kind {
            SimilarityKind::GenEmd => hashes.generations(&entry.runs),
            k if entry.runs == ids => hashes.algorithm(k, &ids),
            _ => continue,
        };
        match load_matrix(dir, entry, &expected) {
            Some(m) => {
                ws.sim_cache.insert(key.clone(), m);
            }
            None => log::warn!("ignoring stale similarity cache {}", entry.file),
        }
    }
    Ok(StoredWorkspace {
        dir: dir.to_path_buf(),
        manifest,
        workspace: ws,
    })
}

/// One row of the quality-measure table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityRow {
    pub algorithm: String,
    pub best_igd: f64,
    pub best_igd_gen: usize,
    pub last_igd: f64,
    pub best_hv: f64,
    pub best_hv_gen: usize,
    pub last_hv: f64,
}

/// Best and last IGD/HV per run, in workspace order, or ascending by best
/// IGD (ties by id) when `sort_by_igd`.
pub fn quality_table(ws: &Workspace, sort_by_igd: bool) -> Result<Vec<QualityRow>> {
    let mut rows = ws
        .runs
        .iter()
        .map(|r| {
            let s = ws.measures.get(&r.algorithm_id).ok_or_else(|| {
                Error::InvalidInput(format!("measures missing for {}", r.algorithm_id))
            })?;
            Ok(QualityRow {
                algorithm: r.algorithm_id.clone(),
                best_igd: s.best_value(Measure::Igd),
                best_igd_gen: s.best_gen(Measure::Igd),
                last_igd: s.last_value(Measure::Igd),
                best_hv: s.best_value(Measure::Hv),
                best_hv_gen: s.best_gen(Measure::Hv),
                last_hv: s.last_value(Measure::Hv),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if sort_by_igd {
        rows.sort_by(|a, b| {
            a.best_igd
                .total_cmp(&b.best_igd)
                .then_with(|| a.algorithm.cmp(&b.algorithm))
        });
    }
    Ok(rows)
}

/// Measures read strictly from the cache files, for reporting.
pub fn cached_measures(dir: &Path) -> Result<(WorkspaceManifest, BTreeMap<String, MeasureSeries>)> {
    let manifest = read_manifest(dir)?.ok_or_else(|| Error::MissingFile(dir.join(MANIFEST_FILE)))?;
    let mut out = BTreeMap::new();
    for run in &manifest.runs {
        let entry = manifest
            .measures
            .get(&run.id)
            .ok_or_else(|| Error::MissingFile(dir.join(measures_path(&run.id))))?;
        let bytes = read_bytes(&dir.join(&entry.file))?;
        let file: MeasureCacheFile = serde_json::from_slice(&bytes)?;
        out.insert(run.id.clone(), file.series);
    }
    Ok((manifest, out))
}
