//! Configuration parsing and experiment orchestration for the `hypolab`
//! binary.

mod config;
mod format;
mod run;

use std::path::PathBuf;

use clap::Parser;

pub use config::{
    Damping, DampingVariant, Evolve, ExperimentConfig, Gapcheck, Geometry, GeometryKind, MethodName,
    MetricName, Model, ModelName, Observability, Output, Pipeline, QuasimodeTask, ScheduleKind,
    Sweep, Tolerance,
};
pub use format::{fmt_f64, fmt_ln};
pub use run::{build_operators, run, Artifacts, RunError, Task};

#[derive(Debug, Parser)]
#[command(name = "hypolab", version, about = "Damped hypoelliptic evolution experiments")]
pub struct Args {
    #[arg(value_enum)]
    pub task: Task,
    /// Experiment file with `section.key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and ensembles; defaults to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the residual tolerance of the task (eigenpair residual for
    /// spectra, dissipation residual for evolutions).
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Loads the configuration named by `args` and applies command-line
/// overrides.
pub fn load_config(args: &Args) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(tol) = args.tol {
        if !(tol > 0.0) {
            return Err(RunError::Config(format!("--tol must be > 0, got {tol}")));
        }
        match args.task {
            Task::Evolve => cfg.tolerance.dissipation = tol,
            _ => cfg.tolerance.residual = tol,
        }
    }
    if args.threads == Some(0) {
        return Err(RunError::Config("--threads must be >= 1".into()));
    }
    Ok(cfg)
}

/// Runs the task described by `args`, writes the artifacts and returns the
/// exit code.
pub fn execute(args: &Args) -> i32 {
    match try_execute(args) {
        Ok(dir) => {
            log::info!("artifacts written to {}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("hypolab: {e}");
            e.exit_code()
        }
    }
}

fn try_execute(args: &Args) -> Result<PathBuf, RunError> {
    let cfg = load_config(args)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| run(args.task, &cfg))?;
    artifacts.write_to(&dir).map_err(RunError::Io)?;
    match artifacts.violation {
        Some(msg) => Err(RunError::Violation(msg)),
        None => Ok(dir),
    }
}
