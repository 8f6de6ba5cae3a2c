use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oneparticle_cli::{run, write_artifacts, CliError, RunOptions, ScenarioConfig, ScenarioKind};

#[derive(Parser)]
#[command(
    name = "oneparticle",
    version,
    about = "One-particle open-system scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized scenarios; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write an SVG line chart.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Block dynamics: rho00, Tr R, |psi|, min eigenvalue, |V| over time.
    Simulate,
    /// First and second moments over time.
    Moments,
    /// Mutual information and its decomposition over time.
    Info,
    /// Mutual information of the two-mode decay curve.
    BellCurve,
    /// Seeded oracle cross-check suite.
    Verify,
    /// Wall time of propagator and full master-equation paths.
    Bench,
}

impl Command {
    fn kind(self) -> ScenarioKind {
        match self {
            Command::Simulate => ScenarioKind::Simulate,
            Command::Moments => ScenarioKind::Moments,
            Command::Info => ScenarioKind::Info,
            Command::BellCurve => ScenarioKind::BellCurve,
            Command::Verify => ScenarioKind::Verify,
            Command::Bench => ScenarioKind::Bench,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let cfg = ScenarioConfig::parse(&text)?;
    let opts = RunOptions {
        seed: cli.seed,
        svg: cli.svg,
    };
    let artifacts = run(cli.command.kind(), &cfg, &text, &opts)?;
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    for path in write_artifacts(&dir, &artifacts)? {
        eprintln!("wrote {}", path.display());
    }
    match artifacts.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
