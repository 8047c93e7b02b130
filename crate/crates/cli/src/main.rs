use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kfcalc::report::write_json;
use kfcalc::scenario::Scenario;
use kfcalc::verify::{verify, Level};
use kfcalc::{experiments, run_scenario};

#[derive(Parser)]
#[command(name = "kfcalc", version, about = "Reproducing-kernel calculus on finite measure spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a scenario file and print a JSON report.
    Run {
        scenario: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write checks.csv into this directory.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Include wall-clock times (makes reports non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Run the built-in invariant suites.
    Verify {
        #[arg(long, default_value = "fast")]
        level: Level,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
    /// List the registered experiment operations.
    Ops,
}

/// Relative paths land under `KFCALC_OUT_DIR` when it is set.
fn resolve(path: Option<PathBuf>) -> Option<PathBuf> {
    let dir = std::env::var_os("KFCALC_OUT_DIR").map(PathBuf::from);
    path.map(|p| match &dir {
        Some(d) if p.is_relative() => d.join(p),
        _ => p,
    })
}

fn emit<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<(), ExitCode> {
    write_json(value, out).map_err(|e| {
        eprintln!("kfcalc: cannot write report: {e}");
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, seed, out, csv, timings } => {
            let scenario = match Scenario::load(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("kfcalc: {e}");
                    return ExitCode::from(2);
                }
            };
            let report = run_scenario(&scenario, seed, timings);
            emit(&report, resolve(out).as_deref()).and_then(|()| {
                if let Some(dir) = resolve(csv) {
                    report.write_csv(&dir).map_err(|e| {
                        eprintln!("kfcalc: cannot write {}: {e}", dir.display());
                        ExitCode::from(2)
                    })?;
                }
                Ok(report.all_passed())
            })
        }
        Command::Verify { level, seed, out, timings } => {
            let report = verify(level, seed, timings);
            emit(&report, resolve(out).as_deref()).map(|()| report.all_passed())
        }
        Command::Ops => {
            for op in experiments::ops() {
                println!("{:<20} {}", op.name, op.summary);
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(code) => code,
    }
}
