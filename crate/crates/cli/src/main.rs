//! `emoscope`: run built-in engines, preprocess a workspace, serve the API
//! and print the quality-measure report.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use emoscope_core::evolution::Engine;

#[derive(Debug, Parser)]
#[command(name = "emoscope", version, about = "EMO run-analysis workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a built-in algorithm and write its run log.
    Run(RunArgs),
    /// Down-sample runs and fill the measure and similarity caches.
    Preprocess(PreprocessArgs),
    /// Serve the read-only HTTP API.
    Serve(ServeArgs),
    /// Print the best/last IGD and HV table and write it as CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: String,
    #[arg(long, value_parser = parse_engine)]
    pub algorithm: Engine,
    /// Number of objectives.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u16).range(2..))]
    pub m: u16,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..))]
    pub pop: u32,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
    pub gens: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, or a file path ending in `.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    pub workspace: PathBuf,
    /// Down-sampling target (generations kept per run).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub sample: Option<u32>,
    /// Run pairs for generation EMD matrices, e.g. `a:b,c:d`.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub pairs: Vec<(String, String)>,
    /// Compute generation EMD matrices for every run pair.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub workspace: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub workspace: PathBuf,
    /// CSV destination; defaults to `<workspace>/report.csv`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_problem(s: &str) -> Result<String, String> {
    let lower = s.to_ascii_lowercase();
    match lower.as_str() {
        "dtlz1" | "dtlz2" | "dtlz3" => Ok(lower),
        _ => Err(format!("unknown problem {s:?} (expected dtlz1, dtlz2 or dtlz3)")),
    }
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    Engine::parse(s).ok_or_else(|| format!("unknown algorithm {s:?} (expected nsga2 or smsemoa)"))
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once(':') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
        _ => Err(format!("pair {s:?} is not of the form a:b")),
    }
}

/// Failures that count as usage errors (exit 2) rather than runtime ones.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
