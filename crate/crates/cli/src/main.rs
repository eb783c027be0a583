use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lgfmo_cli::{execute, parse_config, CliError, Experiment, GridSpec, RunConfig};
use lgfmo_core::{InitialState, PatternChoice};

/// Leggett-Garg quantities for the FMO excitation-transfer model.
#[derive(Debug, Parser)]
#[command(name = "lgfmo", version)]
struct Cli {
    /// Run configuration (`key = value` with `[model]`, `[run]`, `[grid]` sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sign pattern of K: base, flip1, flip2, flip3 or min.
    #[arg(long, global = true, value_parser = parse_pattern)]
    pattern: Option<PatternChoice>,
    /// Use N evenly spaced intervals in (0, 5] ps instead of the published grid.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// K against Δt under coherent dynamics.
    CoherentScan,
    /// Strongest coherent violation per initial state and site.
    Table2,
    /// K against the dephasing rate at fixed intervals.
    DephasingSweep,
    /// Room-temperature K under Gaussian Hamiltonian perturbations.
    Robustness,
    /// Room-temperature K for alternative trapping rates.
    TrappingVariants,
    /// Population trajectory under the master equation.
    Propagate {
        /// mix16, maxmix7 or siteN.
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
}

fn parse_pattern(s: &str) -> Result<PatternChoice, String> {
    PatternChoice::parse(s).ok_or_else(|| format!("expected base, flip1, flip2, flip3 or min, got `{s}`"))
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            parse_config(&text).map_err(|source| CliError::Config { path: path.clone(), source })?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        config.out = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(p) = cli.pattern {
        config.pattern = p;
    }
    match cli.grid_points {
        Some(0) => return Err(CliError::Usage("--grid-points must be at least 1".into())),
        Some(n) => config.dt_grid = GridSpec::Uniform(n),
        None => {}
    }
    if let Some(command) = cli.command {
        config.experiment = Some(match command {
            Command::CoherentScan => Experiment::CoherentScan,
            Command::Table2 => Experiment::Table2,
            Command::DephasingSweep => Experiment::DephasingSweep,
            Command::Robustness => Experiment::Robustness,
            Command::TrappingVariants => Experiment::TrappingVariants,
            Command::Propagate { initial, t_max, step } => {
                if let Some(s) = initial {
                    config.initial_state = InitialState::parse(&s)?;
                }
                if let Some(t) = t_max {
                    config.t_max = t;
                }
                if let Some(s) = step {
                    config.step = s;
                }
                Experiment::Propagate
            }
        });
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match resolve(cli).and_then(|config| execute(&config)) {
        Ok(out) => {
            eprintln!("wrote {} rows to {}", out.rows, out.csv.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("lgfmo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
