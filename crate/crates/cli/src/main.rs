use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phasespace_cli::{list_scenarios, load, run_scenario, run_scenario_with_workers, OUTPUT_ROOT_VAR, WORKERS_VAR};

#[derive(Parser)]
#[command(name = "phasespace", about = "Phase-space quantum dynamics scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in scenario by name.
    Run {
        scenario: String,
        /// Output root; overrides the environment.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List built-in scenarios.
    List,
    /// Print the toolkit version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for entry in list_scenarios() {
                println!("{:<20} {}", entry.name, entry.description);
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("phasespace {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
        Command::Run { scenario, output } => {
            let root = output
                .or_else(|| std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("runs"));
            let workers = match std::env::var(WORKERS_VAR) {
                Ok(v) => match v.parse::<usize>() {
                    Ok(k) if k > 0 => Some(k),
                    _ => {
                        eprintln!("error: {WORKERS_VAR} must be a positive integer, got {v:?}");
                        return ExitCode::from(2);
                    }
                },
                Err(_) => None,
            };
            let result = load(&scenario).and_then(|config| match workers {
                Some(k) => run_scenario_with_workers(&config, &root, k),
                None => run_scenario(&config, &root),
            });
            match result {
                Ok(outcome) => {
                    for w in &outcome.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!("{}", outcome.dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
