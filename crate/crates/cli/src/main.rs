use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmse_workbench::experiment::{self, Command, ExperimentConfig};
use mmse_workbench::{Error, ModelParams};

/// Runs planted-model experiments and writes CSV, JSON and SVG results.
#[derive(Parser)]
#[command(name = "mmse", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Posterior-mean MMSE over a noise grid.
    MmseCurve(Common),
    /// Stability and error of registered estimators.
    Stability(Common),
    /// Checks the MSE lower bound for stable estimators.
    Barrier(Common),
    /// Recovery rate of the efficient solver for the model.
    Solve(Common),
    /// First-moment check for approximate paths in G(n, q).
    CountPaths(Common),
    /// Closed-form Hermite expectations against Monte Carlo.
    HermiteCheck(Common),
    /// Stability ratio of random low-degree polynomials.
    LowdegStability(Common),
    /// Posterior overlap around the tensor PCA recovery window.
    PcaWindow(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model parameters as JSON, e.g. '{"model":"rlc","m":8,"n":4}'.
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Comma-separated noise levels in [0, 1].
    #[arg(long, value_delimiter = ',')]
    rho_grid: Option<Vec<f64>>,
    /// Registered estimator name; repeat for several.
    #[arg(long = "estimator")]
    estimators: Vec<String>,
    /// CSV path. Without it the CSV goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    deterministic: Option<bool>,
    /// Keep only RLC instances with full-rank A.
    #[arg(long)]
    full_rank: bool,
    /// Also write an SVG chart next to the CSV.
    #[arg(long)]
    svg: bool,
    /// Signal-strength constant for the eta threshold.
    #[arg(long)]
    alpha: Option<f64>,
    /// Worker threads.
    #[arg(long, env = "MMSE_THREADS")]
    threads: Option<usize>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn build_config(command: Command, c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut config = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config: {e}")))?;
            let mut value = value;
            if let Some(obj) = value.as_object_mut() {
                obj.insert("command".into(), serde_json::to_value(command).expect("command serializes"));
            }
            serde_json::from_value(value).map_err(|e| Failure::Usage(format!("config: {e}")))?
        }
        None => ExperimentConfig::new(command),
    };
    if let Some(p) = &c.params {
        let params: ModelParams =
            serde_json::from_str(p).map_err(|e| Failure::Usage(format!("params: {e}")))?;
        config.params = Some(params);
    }
    if let Some(seed) = c.seed {
        config.seed = seed;
    }
    if let Some(trials) = c.trials {
        config.trials = trials;
    }
    if let Some(grid) = &c.rho_grid {
        config.rho_grid = grid.clone();
    }
    if !c.estimators.is_empty() {
        config.estimators = c.estimators.clone();
    }
    if let Some(out) = &c.output {
        config.output = Some(out.clone());
    }
    if let Some(d) = c.deterministic {
        config.deterministic = d;
    }
    config.full_rank_only |= c.full_rank;
    config.svg |= c.svg;
    if let Some(a) = c.alpha {
        config.alpha = Some(a);
    }
    config.validate()?;
    Ok(config)
}

fn execute(command: Command, c: &Common) -> Result<(), Failure> {
    let config = build_config(command, c)?;
    if let Some(threads) = c.threads {
        if threads == 0 {
            return Err(Failure::Usage("threads must be positive".into()));
        }
        experiment::configure_threads(threads)?;
    }
    let output = experiment::run(&config)?;
    match &config.output {
        Some(path) => {
            for p in experiment::write_outputs(&config, &output, path)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => print!("{}", experiment::render_csv(&output.rows)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Sub::MmseCurve(c) => (Command::MmseCurve, c),
        Sub::Stability(c) => (Command::Stability, c),
        Sub::Barrier(c) => (Command::Barrier, c),
        Sub::Solve(c) => (Command::Solve, c),
        Sub::CountPaths(c) => (Command::CountPaths, c),
        Sub::HermiteCheck(c) => (Command::HermiteCheck, c),
        Sub::LowdegStability(c) => (Command::LowdegStability, c),
        Sub::PcaWindow(c) => (Command::PcaWindow, c),
    };
    match execute(command, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
