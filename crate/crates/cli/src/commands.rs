use std::fs;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};

use emoscope_core::benchmarks::{by_name, default_divisions, reference_set};
use emoscope_core::evolution::EvolutionConfig;
use emoscope_core::ingest::{build_workspace, write_run_log};
use emoscope_core::measures::Measure;
use emoscope_core::store::{
    cached_measures, load_workspace, preprocess, PreprocessOptions, QualityRow,
};
use emoscope_service::AppState;

use crate::{Cli, Command, PreprocessArgs, ReportArgs, RunArgs, ServeArgs, UsageError};

pub const WORKERS_ENV: &str = "EMOSCOPE_WORKERS";

pub fn dispatch(cli: Cli) -> Result<()> {
    configure_workers()?;
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| UsageError(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn require_dir(path: &Path) -> Result<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(UsageError(format!("workspace directory {} does not exist", path.display())).into())
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let m = args.m as usize;
    let problem = by_name(&args.problem, m).map_err(|e| UsageError(e.to_string()))?;
    let cfg = EvolutionConfig::new(args.pop as usize, args.gens as usize, args.seed);
    cfg.validate().map_err(|e| UsageError(e.to_string()))?;
    let out: PathBuf = if args.out.extension().is_some_and(|e| e == "jsonl") {
        args.out.clone()
    } else {
        args.out.join(format!("{}.jsonl", args.algorithm.id()))
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }

    log::info!(
        "running {} on {} (m={m}, d={}, pop={}, gens={}, seed={})",
        args.algorithm.id(),
        args.problem,
        problem.d(),
        args.pop,
        args.gens,
        args.seed
    );
    let run = args.algorithm.run(&problem, &cfg)?;
    let file = fs::File::create(&out).with_context(|| format!("writing {}", out.display()))?;
    let mut writer = BufWriter::new(file);
    write_run_log(&run, &mut writer)?;
    writer.flush().with_context(|| format!("writing {}", out.display()))?;

    let reference = reference_set(&problem, default_divisions(m))?;
    let ws = build_workspace(problem.meta().clone(), reference, vec![run])?;
    let series = ws.measure(&ws.runs[0])?;
    println!("wrote {} ({} generations)", out.display(), ws.runs[0].len());
    println!(
        "best IGD {} at generation {}",
        series.best_value(Measure::Igd),
        series.best_gen(Measure::Igd)
    );
    println!(
        "best HV  {} at generation {}",
        series.best_value(Measure::Hv),
        series.best_gen(Measure::Hv)
    );
    Ok(())
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<()> {
    require_dir(&args.workspace)?;
    let opts = PreprocessOptions {
        sample_target: args.sample.map(|s| s as usize),
        pairs: args.pairs,
        all_pairs: args.all,
    };
    let s = preprocess(&args.workspace, &opts)?;
    println!(
        "{} runs; measures computed {} reused {}; similarity computed {} reused {}; files written {}",
        s.runs, s.measures_computed, s.measures_reused, s.sim_computed, s.sim_reused, s.files_written
    );
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    require_dir(&args.workspace)?;
    let stored = load_workspace(&args.workspace)?;
    let state = Arc::new(AppState::new(stored)?);
    let addr = SocketAddr::from(([127, 0, 0, 1], args.port));
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting the async runtime")?;
    rt.block_on(emoscope_service::serve(state, addr))
        .with_context(|| format!("serving on {addr}"))?;
    Ok(())
}

const HEADERS: [&str; 7] = [
    "algorithm",
    "best_igd",
    "best_igd_gen",
    "last_igd",
    "best_hv",
    "best_hv_gen",
    "last_hv",
];

fn row_fields(r: &QualityRow, precise: bool) -> [String; 7] {
    let f = |v: f64| if precise { format!("{v}") } else { format!("{v:.6}") };
    [
        r.algorithm.clone(),
        f(r.best_igd),
        r.best_igd_gen.to_string(),
        f(r.last_igd),
        f(r.best_hv),
        r.best_hv_gen.to_string(),
        f(r.last_hv),
    ]
}

/// Quality table as aligned text.
pub fn render_table(rows: &[QualityRow]) -> String {
    let cells: Vec<[String; 7]> = rows.iter().map(|r| row_fields(r, false)).collect();
    let mut widths: Vec<usize> = HEADERS.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |fields: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = fields
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if i == 0 {
                    format!("{f:<w$}", w = widths[i])
                } else {
                    format!("{f:>w$}", w = widths[i])
                }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(HEADERS.to_vec(), &mut out);
    for row in &cells {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    require_dir(&args.workspace)?;
    let (manifest, measures) = cached_measures(&args.workspace)
        .context("reading measure caches (run `emoscope preprocess` first)")?;
    let mut rows: Vec<QualityRow> = manifest
        .runs
        .iter()
        .map(|r| {
            let s = &measures[&r.id];
            QualityRow {
                algorithm: r.id.clone(),
                best_igd: s.best_value(Measure::Igd),
                best_igd_gen: s.best_gen(Measure::Igd),
                last_igd: s.last_value(Measure::Igd),
                best_hv: s.best_value(Measure::Hv),
                best_hv_gen: s.best_gen(Measure::Hv),
                last_hv: s.last_value(Measure::Hv),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.best_igd.total_cmp(&b.best_igd).then_with(|| a.algorithm.cmp(&b.algorithm)));

    print!("{}", render_table(&rows));

    let csv_path = args.csv.unwrap_or_else(|| args.workspace.join("report.csv"));
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record(HEADERS)?;
    for r in &rows {
        w.write_record(row_fields(r, true))?;
    }
    w.flush()?;
    Ok(())
}
