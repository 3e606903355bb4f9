//! The `starmul` binary: run scenario files, the built-in worked example,
//! or the seeded property suite.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use starmul_cli::{example_paper, run_scenario, run_suite, CliError, Report, Scenario};

#[derive(Parser)]
#[command(
    name = "starmul",
    about = "Numerical laboratory for multiplication operators between Orlicz spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check in a scenario file and print the report as JSON.
    Run {
        /// Path to the scenario JSON file.
        scenario: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the band decomposition of any fredholm checks as CSV.
        #[arg(long)]
        bands_csv: Option<PathBuf>,
    },
    /// Run the built-in worked example and print its report as JSON.
    ExamplePaper {
        /// Number of grid points for the symmetric midpoint grid.
        #[arg(long, default_value_t = 1000)]
        grid_points: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded property suite and print its outcome as JSON.
    Props {
        /// Seed for the deterministic instance generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of cases per invariant.
        #[arg(long, default_value_t = 50)]
        cases: u32,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<bool, CliError> {
    match Cli::parse().command {
        Command::Run {
            scenario,
            out,
            bands_csv,
        } => {
            let text = fs::read_to_string(&scenario)
                .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", scenario.display())))?;
            let parsed: Scenario = serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("invalid scenario: {e}")))?;
            let report = run_scenario(&parsed)?;
            if let Some(path) = bands_csv {
                write_bands_csv(&report, &path)?;
            }
            emit(&report.to_json(), out.as_deref())?;
            Ok(report.pass)
        }
        Command::ExamplePaper { grid_points, out } => {
            let report = example_paper(grid_points)?;
            emit(&report.to_json(), out.as_deref())?;
            Ok(report.pass)
        }
        Command::Props { seed, cases } => {
            if cases == 0 {
                return Err(CliError::Parse("cases must be at least 1".into()));
            }
            let outcome = run_suite(seed, cases, None);
            print!("{}", outcome.to_json());
            Ok(outcome.pass)
        }
    }
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One CSV row per band of every fredholm check in the report, plus rows for
/// the residual band and the zero set.
fn write_bands_csv(report: &Report, path: &std::path::Path) -> Result<(), CliError> {
    let mut csv = String::from("check,band,measure\n");
    for (ix, check) in report.checks.iter().enumerate() {
        if check.name != "fredholm" {
            continue;
        }
        let label = format!("fredholm[{ix}]");
        if let Some(Value::Array(bands)) = check.values.get("bands") {
            for band in bands {
                if let Value::Array(pair) = band {
                    if let (Some(n), Some(m)) = (pair[0].as_u64(), pair[1].as_f64()) {
                        csv.push_str(&format!("{label},{n},{m}\n"));
                    }
                }
            }
        }
        if let Some(m) = check
            .values
            .get("residual_band_measure")
            .and_then(Value::as_f64)
        {
            csv.push_str(&format!("{label},residual,{m}\n"));
        }
        if let Some(m) = check.values.get("zero_set_measure").and_then(Value::as_f64) {
            csv.push_str(&format!("{label},zero-set,{m}\n"));
        }
    }
    fs::write(path, csv)
        .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))
}
