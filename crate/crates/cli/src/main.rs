use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use majorant_newton_cli::{run, Verb};

#[derive(Parser)]
#[command(name = "majorant-newton", version, about = "Certified local convergence experiments for Newton's method")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV, JSON and SVG outputs
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Overrides the seed in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Compute ν, ρ, σ and the convergence radius r of a majorant
    Radii,
    /// Run Newton from one start point and write the trace
    Solve,
    /// Check every majorant bound against Newton runs
    Certify,
    /// Run Newton along a ray of start points
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let Some(config) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(3);
    };
    let verb = match cli.command {
        Command::Radii => Verb::Radii,
        Command::Solve => Verb::Solve,
        Command::Certify => Verb::Certify,
        Command::Sweep => Verb::Sweep,
    };
    ExitCode::from(run(verb, &config, cli.out_dir, cli.seed).code())
}
