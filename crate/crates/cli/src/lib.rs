// SPDX-License-Identifier: Apache-2.0

//! Command-line runner for basin-lab experiments.
//!
//! `basin-lab <verb> --config run.json` resolves the config, runs the
//! experiment in a rayon pool of `--workers` threads and writes its
//! artifacts plus a `manifest.json` with the resolved config and a SHA-256
//! of every artifact. Exit codes: 0 success, 1 runtime error, 2 config
//! error, 3 certificate failure.

pub mod artifacts;
pub mod config;
pub mod run;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use artifacts::{ArtifactEntry, Manifest, MANIFEST_NAME};
pub use config::{ConfigError, Experiment, Overrides, RunConfig};
pub use run::{execute, RunError, RunOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    Slice,
    Quadrant,
    Dim,
    Schedule,
    Probe,
    Linearize,
    Converge,
}

impl Verb {
    pub fn experiment(self) -> Experiment {
        match self {
            Verb::Slice => Experiment::Slice,
            Verb::Quadrant => Experiment::RealQuadrant,
            Verb::Dim => Experiment::Dimension,
            Verb::Schedule => Experiment::ScheduleBuild,
            Verb::Probe => Experiment::CircleProbe,
            Verb::Linearize => Experiment::Linearization,
            Verb::Converge => Experiment::JuliaConvergence,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "basin-lab",
    version,
    about = "Non-autonomous Hénon basin experiments"
)]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    pub verb: Verb,
    /// JSON run configuration. Without it every default applies.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "BASIN_LAB_WORKERS")]
    pub workers: Option<usize>,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            budget: self.budget,
            resolution: self.resolution,
            seed: self.seed,
            out: self.out.clone(),
        }
    }
}

/// Reads, resolves and validates the config named on the command line.
pub fn load_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let raw = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                ConfigError::new("", format!("cannot read {}: {e}", path.display()))
            })?;
            config::parse(&text)
                .map_err(|e| ConfigError::new("", format!("{}: {}", path.display(), e.message)))?
        }
        None => RunConfig::default(),
    };
    raw.resolve(cli.verb.experiment(), &cli.overrides())
}

/// Runs `config` on a dedicated pool of `workers` threads.
pub fn run_with_workers(config: RunConfig, workers: Option<usize>) -> Result<RunOutcome, RunError> {
    let workers = match workers {
        Some(0) => return Err(ConfigError::new("workers", "must be at least 1").into()),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Compute(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(config))
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let result = load_config(&cli)
        .map_err(RunError::from)
        .and_then(|c| run_with_workers(c, cli.workers));
    match result {
        Ok(outcome) => {
            let dir = outcome.output_dir.display();
            let _ = writeln!(
                stdout,
                "{}: {} artifacts in {dir}",
                outcome.manifest.experiment,
                outcome.manifest.artifacts.len()
            );
            if let Some(f) = &outcome.certificate_failure {
                let _ = writeln!(stderr, "certificate failure: {f}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
