//! Run-log protocol, down-sampling and workspace assembly.
//!
//! A run log is UTF-8 JSON lines: one header object followed by one object
//! per generation.
//!
//! ```text
//! {"schema":"emo-run/1","algorithm":"nsga2","problem":"dtlz3","m":3,"d":12}
//! {"gen":0,"objectives":[[...],...],"decisions":[[...],...]}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{measure_run_with, MeasureConfig, MeasureSeries, Normalizer};
use crate::model::{DecisionVector, ObjectiveVector, ProblemMeta, ReferenceSet, SolutionSet};
use crate::similarity::SimilarityMatrix;

pub const RUN_LOG_SCHEMA: &str = "emo-run/1";

/// One generation of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    /// Original 0-based generation counter.
    pub index: usize,
    pub solutions: SolutionSet,
}

/// Where a run came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunSource {
    Builtin,
    Imported,
}

/// The ordered generations of one algorithm execution.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRun {
    pub algorithm_id: String,
    pub problem: String,
    pub decision_dim: Option<usize>,
    pub source: RunSource,
    generations: Vec<GenerationRecord>,
}

impl AlgorithmRun {
    /// Validates ordering and dimension consistency.
    pub fn new(
        algorithm_id: impl Into<String>,
        problem: impl Into<String>,
        decision_dim: Option<usize>,
        source: RunSource,
        generations: Vec<GenerationRecord>,
    ) -> Result<Self> {
        let algorithm_id = algorithm_id.into();
        if algorithm_id.is_empty() {
            return Err(Error::InvalidInput("algorithm id is empty".into()));
        }
        let first = generations
            .first()
            .ok_or_else(|| Error::InvalidInput(format!("run {algorithm_id} has no generations")))?;
        let m = first.solutions.dim();
        for pair in generations.windows(2) {
            if pair[1].index <= pair[0].index {
                return Err(Error::InvalidInput(format!(
                    "generation indices must increase strictly ({} then {})",
                    pair[0].index, pair[1].index
                )));
            }
        }
        for g in &generations {
            Error::check_dim(m, g.solutions.dim())?;
        }
        Ok(Self {
            algorithm_id,
            problem: problem.into(),
            decision_dim,
            source,
            generations,
        })
    }

    /// A built-in run without problem metadata, mostly for tests.
    pub fn builtin(algorithm_id: impl Into<String>, generations: Vec<GenerationRecord>) -> Result<Self> {
        Self::new(algorithm_id, "unknown", None, RunSource::Builtin, generations)
    }

    pub fn generations(&self) -> &[GenerationRecord] {
        &self.generations
    }

    pub fn len(&self) -> usize {
        self.generations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generations.is_empty()
    }

    /// Objective dimension.
    pub fn m(&self) -> usize {
        self.generations[0].solutions.dim()
    }

    /// Looks a record up by its original generation index.
    pub fn generation(&self, index: usize) -> Option<&GenerationRecord> {
        self.generations
            .binary_search_by_key(&index, |g| g.index)
            .ok()
            .map(|i| &self.generations[i])
    }

    pub fn last(&self) -> &GenerationRecord {
        self.generations.last().expect("runs are non-empty")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    algorithm: String,
    problem: String,
    m: usize,
    d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<RunSource>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GenerationLine {
    gen: usize,
    objectives: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decisions: Option<Vec<Vec<f64>>>,
}

/// Parses a run log, reporting the 1-based line of the first problem.
pub fn parse_run_log<R: BufRead>(reader: R) -> Result<AlgorithmRun> {
    let mut lines = reader.lines().enumerate();
    let (header, header_line) = loop {
        match lines.next() {
            None => return Err(Error::InvalidInput("run log is empty".into())),
            Some((i, line)) => {
                let line = line.map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                let header: Header = serde_json::from_str(&line).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("bad header: {e}"),
                })?;
                break (header, i + 1);
            }
        }
    };
    if header.schema != RUN_LOG_SCHEMA {
        return Err(Error::Schema {
            line: header_line,
            message: format!("unsupported schema {:?}, expected {RUN_LOG_SCHEMA:?}", header.schema),
        });
    }
    if header.m == 0 {
        return Err(Error::Schema {
            line: header_line,
            message: "m must be positive".into(),
        });
    }

    let mut generations: Vec<GenerationRecord> = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: GenerationLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let schema_err = |message: String| Error::Schema {
            line: lineno,
            message,
        };
        if parsed.objectives.is_empty() {
            return Err(schema_err("generation has no solutions".into()));
        }
        if let Some(prev) = generations.last() {
            if parsed.gen <= prev.index {
                return Err(schema_err(format!(
                    "generation {} does not follow {}",
                    parsed.gen, prev.index
                )));
            }
        }
        let mut objectives = Vec::with_capacity(parsed.objectives.len());
        for (k, row) in parsed.objectives.into_iter().enumerate() {
            if row.len() != header.m {
                return Err(schema_err(format!(
                    "objective vector {k} has {} values, header says m={}",
                    row.len(),
                    header.m
                )));
            }
            objectives.push(ObjectiveVector::new(row).map_err(|e| schema_err(e.to_string()))?);
        }
        let decisions = match parsed.decisions {
            None => None,
            Some(rows) => {
                if rows.len() != objectives.len() {
                    return Err(schema_err(format!(
                        "{} decision vectors for {} objective vectors",
                        rows.len(),
                        objectives.len()
                    )));
                }
                let mut out = Vec::with_capacity(rows.len());
                for (k, row) in rows.into_iter().enumerate() {
                    if let Some(d) = header.d {
                        if row.len() != d {
                            return Err(schema_err(format!(
                                "decision vector {k} has {} values, header says d={d}",
                                row.len()
                            )));
                        }
                    }
                    out.push(DecisionVector::new(row).map_err(|e| schema_err(e.to_string()))?);
                }
                Some(out)
            }
        };
        let solutions =
            SolutionSet::with_decisions(objectives, decisions).map_err(|e| schema_err(e.to_string()))?;
        generations.push(GenerationRecord {
            index: parsed.gen,
            solutions,
        });
    }
    if generations.is_empty() {
        return Err(Error::InvalidInput(format!(
            "run log for {} has no generations",
            header.algorithm
        )));
    }
    AlgorithmRun::new(
        header.algorithm,
        header.problem,
        header.d,
        header.source.unwrap_or(RunSource::Imported),
        generations,
    )
}

/// Writes a run in the run-log format.
pub fn write_run_log<W: Write>(run: &AlgorithmRun, mut out: W) -> Result<()> {
    let header = Header {
        schema: RUN_LOG_SCHEMA.into(),
        algorithm: run.algorithm_id.clone(),
        problem: run.problem.clone(),
        m: run.m(),
        d: run.decision_dim,
        source: Some(run.source),
    };
    let io = |e| Error::io("<run log>", e);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n").map_err(io)?;
    for g in run.generations() {
        let line = GenerationLine {
            gen: g.index,
            objectives: g.solutions.objectives().iter().map(|v| v.to_vec()).collect(),
            decisions: g
                .solutions
                .decisions()
                .map(|ds| ds.iter().map(|v| v.to_vec()).collect()),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n").map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(())
}

/// Indices kept by uniform down-sampling of `n` generations to `target`.
pub fn downsample_positions(n: usize, target: usize) -> Result<Vec<usize>> {
    if target < 2 {
        return Err(Error::InvalidInput(format!(
            "down-sampling target must be at least 2, got {target}"
        )));
    }
    if target >= n {
        return Ok((0..n).collect());
    }
    let span = (n - 1) as u64;
    let steps = (target - 1) as u64;
    // round(i * span / steps), halves rounded up
    Ok((0..target as u64)
        .map(|i| ((2 * i * span + steps) / (2 * steps)) as usize)
        .collect())
}

/// Keeps `target` evenly spaced generations, always including first and last.
pub fn downsample(run: &AlgorithmRun, target: usize) -> Result<AlgorithmRun> {
    let keep = downsample_positions(run.len(), target)?;
    if keep.len() == run.len() {
        return Ok(run.clone());
    }
    let generations = keep.iter().map(|&i| run.generations[i].clone()).collect();
    Ok(AlgorithmRun {
        generations,
        ..run.clone_meta()
    })
}

impl AlgorithmRun {
    fn clone_meta(&self) -> AlgorithmRun {
        AlgorithmRun {
            algorithm_id: self.algorithm_id.clone(),
            problem: self.problem.clone(),
            decision_dim: self.decision_dim,
            source: self.source,
            generations: Vec::new(),
        }
    }
}

/// Writes a reference set as CSV with header `f1,...,fm`.
pub fn write_reference_csv<W: Write>(reference: &ReferenceSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (1..=reference.dim()).map(|j| format!("f{j}")).collect();
    w.write_record(&header)?;
    for p in reference.points() {
        w.write_record(p.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<reference csv>", e))?;
    Ok(())
}

/// Reads a reference CSV, validating the `f1,...,fm` header.
pub fn read_reference_csv<R: std::io::Read>(input: R) -> Result<ReferenceSet> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    for (j, name) in header.iter().enumerate() {
        if name.trim() != format!("f{}", j + 1) {
            return Err(Error::Schema {
                line: 1,
                message: format!("expected column f{} in reference header, found {name:?}", j + 1),
            });
        }
    }
    let mut points = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let values = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != header.len() {
            return Err(Error::Schema {
                line,
                message: format!("{} values for {} columns", values.len(), header.len()),
            });
        }
        points.push(ObjectiveVector::new(values).map_err(|e| Error::Schema {
            line,
            message: e.to_string(),
        })?);
    }
    ReferenceSet::new(points)
}

/// Problem, reference set, runs and their cached results.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub problem: ProblemMeta,
    pub reference: ReferenceSet,
    pub runs: Vec<AlgorithmRun>,
    pub measure_config: MeasureConfig,
    /// Min-max normalization before IGD and EMD.
    pub normalize: bool,
    pub measures: BTreeMap<String, MeasureSeries>,
    pub sim_cache: BTreeMap<String, SimilarityMatrix>,
}

/// Validates ids and dimensions; caches start empty and the HV anchor uses
/// the reference-derived default.
pub fn build_workspace(
    problem: ProblemMeta,
    reference: ReferenceSet,
    runs: Vec<AlgorithmRun>,
) -> Result<Workspace> {
    problem.validate()?;
    Error::check_dim(problem.m, reference.dim())?;
    if runs.is_empty() {
        return Err(Error::InvalidInput("workspace needs at least one run".into()));
    }
    let mut seen = BTreeSet::new();
    for run in &runs {
        if !seen.insert(run.algorithm_id.as_str()) {
            return Err(Error::DuplicateAlgorithm(run.algorithm_id.clone()));
        }
        Error::check_dim(problem.m, run.m())?;
    }
    let measure_config = MeasureConfig::from_reference(&reference);
    Ok(Workspace {
        problem,
        reference,
        runs,
        measure_config,
        normalize: false,
        measures: BTreeMap::new(),
        sim_cache: BTreeMap::new(),
    })
}

impl Workspace {
    pub fn run(&self, id: &str) -> Option<&AlgorithmRun> {
        self.runs.iter().find(|r| r.algorithm_id == id)
    }

    pub fn algorithm_ids(&self) -> Vec<&str> {
        self.runs.iter().map(|r| r.algorithm_id.as_str()).collect()
    }

    /// Min-max map fitted on the reference, when normalization is enabled.
    pub fn normalizer(&self) -> Option<Normalizer> {
        self.normalize.then(|| Normalizer::fit(&self.reference))
    }

    /// Measure series of one run under the workspace settings.
    pub fn measure(&self, run: &AlgorithmRun) -> Result<MeasureSeries> {
        measure_run_with(run, &self.reference, &self.measure_config, self.normalizer().as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gen(index: usize, rows: Vec<Vec<f64>>) -> GenerationRecord {
        GenerationRecord {
            index,
            solutions: SolutionSet::from_rows(rows).unwrap(),
        }
    }

    fn synthetic_run(id: &str, n: usize, m: usize) -> AlgorithmRun {
        AlgorithmRun::new(
            id,
            "synthetic",
            None,
            RunSource::Imported,
            (0..n).map(|i| gen(i, vec![vec![i as f64; m], vec![0.5; m]])).collect(),
        )
        .unwrap()
    }

    const LOG: &str = r#"{"schema":"emo-run/1","algorithm":"a","problem":"dtlz2","m":2,"d":null}
{"gen":0,"objectives":[[1.0,2.0],[2.0,1.0]]}
{"gen":1,"objectives":[[0.5,1.0]]}
{"gen":5,"objectives":[[0.25,0.5],[0.5,0.25]],"decisions":[[0.1,0.2],[0.3,0.4]]}
"#;

    #[test]
    fn parses_three_generations() {
        let run = parse_run_log(LOG.as_bytes()).unwrap();
        assert_eq!(run.len(), 3);
        assert_eq!(run.algorithm_id, "a");
        assert_eq!(run.source, RunSource::Imported);
        assert_eq!(run.generations()[2].index, 5);
        assert!(run.generations()[2].solutions.decisions().is_some());
    }

    #[test]
    fn wrong_arity_names_the_line() {
        let bad = LOG.replace("[0.5,1.0]", "[0.5,1.0,3.0]");
        match parse_run_log(bad.as_bytes()) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_names_the_line() {
        let bad = LOG.replace(r#"{"gen":1,"#, r#"{"gen":1"#);
        match parse_run_log(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_and_headless_logs_fail() {
        assert!(parse_run_log("".as_bytes()).is_err());
        let header_only = LOG.lines().next().unwrap();
        assert!(parse_run_log(header_only.as_bytes()).is_err());
        let wrong_schema = LOG.replace("emo-run/1", "emo-run/9");
        assert!(matches!(
            parse_run_log(wrong_schema.as_bytes()),
            Err(Error::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn non_increasing_generations_rejected() {
        let bad = LOG.replace(r#""gen":5"#, r#""gen":1"#);
        assert!(matches!(
            parse_run_log(bad.as_bytes()),
            Err(Error::Schema { line: 4, .. })
        ));
    }

    #[test]
    fn downsample_examples() {
        let run = synthetic_run("r", 500, 2);
        let d = downsample(&run, 100).unwrap();
        assert_eq!(d.len(), 100);
        assert_eq!(d.generations()[0].index, 0);
        assert_eq!(d.generations()[99].index, 499);

        assert_eq!(downsample(&run, 500).unwrap(), run);
        assert_eq!(downsample(&run, 900).unwrap(), run);
        assert!(downsample(&run, 1).is_err());

        assert_eq!(downsample_positions(5, 3).unwrap(), vec![0, 2, 4]);
    }

    proptest! {
        #[test]
        fn downsample_is_idempotent_ordered_distinct(n in 1usize..300, target in 2usize..120) {
            let run = synthetic_run("r", n, 2);
            let once = downsample(&run, target).unwrap();
            prop_assert_eq!(downsample(&once, target).unwrap(), once.clone());
            let idx: Vec<usize> = once.generations().iter().map(|g| g.index).collect();
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(idx.len(), target.min(n));
            prop_assert_eq!(idx[0], 0);
            prop_assert_eq!(*idx.last().unwrap(), n - 1);
        }
    }

    #[test]
    fn reference_csv_round_trip() {
        let pts = vec![
            ObjectiveVector::new(vec![0.0, 1.0]).unwrap(),
            ObjectiveVector::new(vec![0.1 + 0.2, 0.7]).unwrap(),
            ObjectiveVector::new(vec![1.0, 0.0]).unwrap(),
        ];
        let r = ReferenceSet::new(pts).unwrap();
        let mut buf = Vec::new();
        write_reference_csv(&r, &mut buf).unwrap();
        assert!(buf.starts_with(b"f1,f2\n"));
        assert_eq!(read_reference_csv(buf.as_slice()).unwrap(), r);
        assert!(read_reference_csv("x,y\n1,2\n".as_bytes()).is_err());
    }

    fn meta(m: usize) -> ProblemMeta {
        ProblemMeta::new("synthetic", m, None, vec![]).unwrap()
    }

    fn reference(m: usize) -> ReferenceSet {
        let pts = (0..m)
            .map(|j| {
                ObjectiveVector::new((0..m).map(|k| if k == j { 1.0 } else { 0.0 }).collect()).unwrap()
            })
            .collect();
        ReferenceSet::new(pts).unwrap()
    }

    #[test]
    fn workspace_validation() {
        let ws = build_workspace(
            meta(3),
            reference(3),
            vec![synthetic_run("a", 3, 3), synthetic_run("b", 3, 3)],
        )
        .unwrap();
        assert_eq!(ws.algorithm_ids(), vec!["a", "b"]);
        assert!(ws.measures.is_empty() && ws.sim_cache.is_empty());

        assert!(matches!(
            build_workspace(meta(3), reference(3), vec![synthetic_run("a", 3, 2)]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            build_workspace(
                meta(3),
                reference(3),
                vec![synthetic_run("a", 3, 3), synthetic_run("a", 3, 3)]
            ),
            Err(Error::DuplicateAlgorithm(_))
        ));

        let many: Vec<_> = (0..36).map(|i| synthetic_run(&format!("alg{i}"), 2, 3)).collect();
        assert_eq!(build_workspace(meta(3), reference(3), many).unwrap().runs.len(), 36);
    }
}
