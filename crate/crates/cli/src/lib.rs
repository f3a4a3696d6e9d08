//! Config-driven batch runner for the `freeprod` verification tasks.
//!
//! A run reads one JSON [`TaskConfig`], executes the task and emits a JSON
//! [`Report`]. Exit codes: 0 when every enforced check passes, 1 when one
//! fails, 2 for configuration and task errors.

pub mod config;
pub mod report;
pub mod tasks;

use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;

pub use config::{ConfigError, Task, TaskConfig};
pub use report::{Assertion, Certificate, Quantity, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Config(ConfigError),
    Task(freeprod::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Task(e) => write!(f, "task error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<freeprod::Error> for RunError {
    fn from(e: freeprod::Error) -> Self {
        RunError::Task(e)
    }
}

/// Runs a parsed config.
pub fn run(config: &TaskConfig) -> Result<Report, RunError> {
    if config.version != config::SCHEMA_VERSION {
        return Err(ConfigError::new(
            "/version",
            format!(
                "unsupported schema version {}, expected {}",
                config.version,
                config::SCHEMA_VERSION
            ),
        )
        .into());
    }
    tasks::dispatch(config)
}

#[derive(Debug, Clone, Parser)]
#[command(name = "freeprod", version, about = "Run a free product verification task")]
pub struct Options {
    /// Task config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides parameters.tol.
    #[arg(long)]
    pub tol: Option<f64>,
    /// No summary on stderr.
    #[arg(long)]
    pub quiet: bool,
    /// Record wall-clock time in the report; such reports are not reproducible.
    #[arg(long)]
    pub timing: bool,
}

/// Applies the command-line overrides to a config.
pub fn apply_overrides(mut config: TaskConfig, opts: &Options) -> Result<TaskConfig, ConfigError> {
    if let Some(seed) = opts.seed {
        match config.generator.as_mut() {
            Some(g) => g.seed = seed,
            None => return Err(ConfigError::new("/generator", "--seed needs a generator in the config")),
        }
    }
    if let Some(tol) = opts.tol {
        config.parameters.tol = Some(tol);
    }
    Ok(config)
}

/// Runs the command line and returns the exit code.
pub fn main_with(opts: &Options) -> i32 {
    let started = Instant::now();
    let fail = |msg: String| {
        eprintln!("freeprod: {msg}");
        EXIT_ERROR
    };
    let text = match std::fs::read_to_string(&opts.config) {
        Ok(t) => t,
        Err(e) => return fail(format!("cannot read {}: {e}", opts.config.display())),
    };
    let config = match TaskConfig::from_json(&text).and_then(|c| apply_overrides(c, opts)) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let mut report = match run(&config) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    if opts.timing {
        report.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    let json = report.to_json();
    match &opts.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                return fail(format!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{json}"),
    }
    if !opts.quiet {
        for a in report.assertions.iter().filter(|a| !a.passed) {
            let kind = if a.enforced { "FAILED" } else { "note" };
            eprintln!("{kind}: {} ({} > {})", a.name, a.lhs, a.rhs);
        }
        let verdict = if report.passed { "pass" } else { "FAIL" };
        eprintln!("{}: {verdict}", report.task);
    }
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
