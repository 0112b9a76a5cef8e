use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swarmdyn_cli::{commands, CliError, Format};

/// Two-segment swarm dynamics: simulation, equilibria, sweeps, optimal control.
#[derive(Debug, Parser)]
#[command(name = "swarmdyn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Output directory; overrides the scenario's `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for sweeps, grids and gradients.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Integrate the model under the scenario's controller.
    Simulate,
    /// Stationary points and their stability.
    Equilibria,
    /// Delay-vs-u or seeder-arrival sweeps.
    Sweep,
    /// Optimal open-loop control of the terminal leecher mass.
    Optimize,
    /// Vector field on an (x_a, x_b) grid.
    PhaseField,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let path = cli
        .scenario
        .ok_or_else(|| CliError::Usage("--scenario PATH is required".into()))?;
    let default_format = match cli.command {
        Command::Equilibria => Format::Json,
        _ => Format::Csv,
    };
    let run = commands::load(&path, cli.out, cli.format.unwrap_or(default_format))?;
    match cli.command {
        Command::Simulate => commands::simulate(&run),
        Command::Equilibria => commands::equilibria(&run),
        Command::Sweep => commands::sweep(&run),
        Command::Optimize => commands::optimize(&run),
        Command::PhaseField => commands::phase(&run),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
