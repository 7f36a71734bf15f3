//! Experiment pipelines behind the `majorant-newton` command.

pub mod commands;
pub mod config;
pub mod plot;
pub mod trace;

use std::fmt;
use std::path::PathBuf;

use majorant_newton::Error;

pub use commands::{run_certify, run_radii, run_solve, run_sweep, Context, SweepRow};
pub use config::ExperimentConfig;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// A certified bound failed.
    Violation = 2,
    /// Bad configuration or failed precondition.
    Config = 3,
    /// Newton did not converge.
    Solver = 4,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// An error carrying the exit status it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { exit: Exit::Config, message: message.into() }
    }

    pub fn io(e: csv::Error) -> Self {
        Self::config(format!("i/o error: {e}"))
    }

    pub fn file(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::NonFinite { .. } | Error::NoConvergence { .. } => Exit::Solver,
            _ => Exit::Config,
        };
        Self { exit, message: e.to_string() }
    }
}

/// Which pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Radii,
    Solve,
    Certify,
    Sweep,
}

/// Loads the config and runs `verb`, returning the exit status.
pub fn run(verb: Verb, config: &std::path::Path, out_dir: PathBuf, seed: Option<u64>) -> Exit {
    let ctx = Context { out_dir, seed };
    let result = ExperimentConfig::from_path(config).and_then(|cfg| {
        std::fs::create_dir_all(&ctx.out_dir).map_err(|e| Failure::file(&ctx.out_dir, e))?;
        match verb {
            Verb::Radii => run_radii(&cfg, &ctx).map(|o| o.exit),
            Verb::Solve => run_solve(&cfg, &ctx).map(|o| o.exit),
            Verb::Certify => run_certify(&cfg, &ctx).map(|o| o.exit),
            Verb::Sweep => run_sweep(&cfg, &ctx).map(|o| o.exit),
        }
    });
    match result {
        Ok(exit) => exit,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit
        }
    }
}
