use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pshlab_cli::report::RunStatus;
use pshlab_cli::{config, run, RunOptions};

#[derive(Parser)]
#[command(name = "pshlab", version, about = "Run pluripotential convergence experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write report.json plus diagnostics CSVs.
    Run {
        config: PathBuf,
        /// Output directory (PSHLAB_OUT overrides it).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for sweeps and the suite; 0 means one per core.
        #[arg(long)]
        jobs: Option<usize>,
        /// Seed for randomized experiments, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config against the schema without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { config: path } => match config::load(&path) {
            Ok(cfg) => {
                println!("{}: valid {} experiment ({:?})", path.display(), cfg.experiment.name(), cfg.model);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                ExitCode::from(2)
            }
        },
        Command::Run { config: path, out, jobs, seed } => {
            let opts = RunOptions { out, env_out: std::env::var_os("PSHLAB_OUT").map(PathBuf::from), jobs, seed };
            let result = match run(&path, &opts) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            let r = &result.report;
            match r.status {
                RunStatus::ConfigError => eprintln!("{}", r.error.as_deref().unwrap_or("config error")),
                RunStatus::CheckFailure => {
                    if let Some(e) = &r.error {
                        eprintln!("{e}");
                    }
                    for c in r.failed_checks() {
                        eprintln!("check failed: {} = {:e} (tolerance {:e})", c.quantity, c.value, c.tolerance);
                    }
                }
                RunStatus::Pass => {}
            }
            let passed = r.checks.iter().filter(|c| c.passed).count();
            println!(
                "{:?}: {passed} of {} checks passed; report at {}",
                r.status,
                r.checks.len(),
                result.out_dir.join("report.json").display()
            );
            ExitCode::from(result.exit_code() as u8)
        }
    }
}
