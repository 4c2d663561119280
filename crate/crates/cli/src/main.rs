use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pxl_cli::{CliError, ExperimentConfig, RawConfig};

/// Optimal proportional excess-of-loss reinsurance toolkit.
#[derive(Parser)]
#[command(name = "pxl", version, about)]
struct Cli {
    /// Experiment configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides `sample_seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// CSV output path; overrides `out` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the insurer's expected-utility problem for (alpha, M).
    SolveInsurer,
    /// Solve the reinsurer's expected-utility problem for (alpha, M).
    SolveReinsurer,
    /// Posterior means of (alpha, M) from the configured observations.
    Posterior,
    /// Balanced combination of explicit targets and posterior means.
    Combine,
    /// Full three-step pipeline: both solves, posterior, combinations.
    Pipeline,
    /// Balanced-estimate table over the canonical 18 weight pairs.
    Table1,
    /// Replication study over configured claim/prior rows.
    Table2,
    /// Compound-Poisson surplus simulation for one contract.
    Simulate,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let raw = RawConfig::load(config_path)?;
    let mut cfg = ExperimentConfig::from_raw(&raw)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }

    let output = match cli.command {
        Command::SolveInsurer => pxl_cli::solve_insurer_cmd(&cfg),
        Command::SolveReinsurer => pxl_cli::solve_reinsurer_cmd(&cfg),
        Command::Posterior => pxl_cli::posterior_cmd(&cfg),
        Command::Combine => pxl_cli::combine_cmd(&cfg, &raw),
        Command::Pipeline => pxl_cli::pipeline_cmd(&cfg),
        Command::Table1 => pxl_cli::table1_cmd(&cfg, &raw),
        Command::Table2 => pxl_cli::table2_cmd(&cfg),
        Command::Simulate => pxl_cli::simulate_cmd(&cfg, &raw),
    }
    .map_err(|e| e.with_context(command_name(&cli.command).to_string()))?;

    print!("{}", output.summary);
    if let (Some(csv), Some(path)) = (&output.csv, &cfg.out) {
        std::fs::write(path, csv)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        println!("csv written to {}", path.display());
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::SolveInsurer => "solve-insurer",
        Command::SolveReinsurer => "solve-reinsurer",
        Command::Posterior => "posterior",
        Command::Combine => "combine",
        Command::Pipeline => "pipeline",
        Command::Table1 => "table1",
        Command::Table2 => "table2",
        Command::Simulate => "simulate",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output is not an error.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
