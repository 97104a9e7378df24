use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grassflow::config::{Mode, Overrides};
use grassflow::{parse_config_with, run_scenario};

/// Numerical laboratory for mean curvature flow of graphs in higher
/// codimension and the Grassmannian geometry behind its estimates.
#[derive(Parser)]
#[command(name = "grassflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a graph flow with the configured monitors.
    Flow(RunArgs),
    /// Randomized scan of the closed-form lower bounds on the Grassmannian.
    GrassmannCheck(RunArgs),
    /// Compare the closed-form Hessian of v with the finite-difference oracle.
    HessianCheck(RunArgs),
    /// Summarise an earlier run directory.
    Report(RunArgs),
    /// List the initial-data presets and their parameters.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(mode: Mode, args: &RunArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: reading {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match parse_config_with(&text, &Overrides::from_env(args.seed)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    if cfg.mode != mode {
        eprintln!(
            "error: {} configures mode `{}` but the `{}` subcommand was used",
            args.config.display(),
            cfg.mode.as_str(),
            mode.as_str()
        );
        return ExitCode::from(2);
    }
    match run_scenario(&cfg) {
        Ok(outcome) => {
            for (name, verdict) in &outcome.verdicts {
                eprintln!("{name}: {verdict}");
            }
            for e in &outcome.errors {
                eprintln!("error: {e}");
            }
            eprintln!("output: {}", outcome.output_dir.display());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Flow(args) => execute(Mode::Flow, args),
        Command::GrassmannCheck(args) => execute(Mode::GrassmannCheck, args),
        Command::HessianCheck(args) => execute(Mode::HessianCheck, args),
        Command::Report(args) => execute(Mode::Report, args),
        Command::Presets => {
            print!("{}", grassflow_core::mcf::list_presets());
            ExitCode::SUCCESS
        }
    }
}
