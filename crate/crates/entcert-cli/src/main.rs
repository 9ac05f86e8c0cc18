mod commands;
mod input;

use clap::{Parser, Subcommand};
use commands::AnalyzeMode;
use entcert::robustness::Figure;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

const STATE_HELP: &str = "State: a JSON state file, or a catalog name (optionally prefixed \
named:) followed by key=value parameters, e.g. `named:ghz n=4` or `dicke n=4 l=2 rotated`";

#[derive(Parser)]
#[command(name = "entcert", version, about = "Partial-separability criteria for multiqubit density matrices")]
struct Cli {
    /// Criterion tolerance; violations need margin > tol.
    #[arg(long, env = "ENTCERT_TOL", global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate criteria and print a JSON report with verdicts and classification.
    Analyze {
        #[arg(required = true, num_args = 1.., help = STATE_HELP)]
        state: Vec<String>,
        /// Conditions of one separability level k (2..=N).
        #[arg(long, conflicts_with_all = ["splits", "chain"])]
        level: Option<usize>,
        /// Split conditions at every level; only `all` is accepted.
        #[arg(long, value_parser = ["all"], conflicts_with = "chain")]
        splits: Option<String>,
        /// The four-expression chain for every antidiagonal element.
        #[arg(long)]
        chain: bool,
    },
    /// Noise threshold p0 for one channel and criterion, as JSON or CSV.
    ///
    /// CSV columns: N, state, channel, criterion, p0, method.
    Robustness {
        #[arg(required = true, num_args = 1.., help = STATE_HELP)]
        state: Vec<String>,
        /// white, colored, depolarize, dephase or dissipate.
        #[arg(long, default_value = "white")]
        noise: String,
        /// full, some, all-splits or fidelity.
        #[arg(long, default_value = "full")]
        criterion: String,
        #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
        format: String,
    },
    /// Measurement settings needed to evaluate the criteria.
    Settings {
        #[arg(required = true, num_args = 1.., help = STATE_HELP)]
        state: Vec<String>,
        /// real, imaginary, general or all; chosen from the state when omitted.
        #[arg(long)]
        profile: Option<String>,
        /// One-based row j of the target element rho_{j, jbar}.
        #[arg(long)]
        row: Option<usize>,
    },
    /// Excluded and consistent separability classes.
    Classify {
        #[arg(required = true, num_args = 1.., help = STATE_HELP)]
        state: Vec<String>,
        /// auto (three-qubit classes for N=3, full scan otherwise), three-qubit, dc or scan.
        #[arg(long, default_value = "auto")]
        method: String,
    },
    /// Reference tables as CSV.
    ///
    /// tabel1: four-qubit bipartite solution sets, columns set + one per split, rows z1..z4.
    /// tabel2: four-qubit tripartite solution sets, rows z1..z2.
    /// ghz: GHZ thresholds for N=2..8; columns N, state, channel, criterion, p0, method.
    Tables {
        #[arg(long, value_parser = ["tabel1", "tabel2", "ghz"])]
        which: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot-ready figure series as CSV, N=2..8.
    ///
    /// lhv-gap: N, entangled, separable, lhv (maximal <X_0>^2 + <Y_0>^2).
    /// ghz-noise: N, full, all_splits, stabilizer_full, stabilizer_some.
    Figures {
        #[arg(long, value_parser = ["lhv-gap", "ghz-noise"])]
        which: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| CliError::Validation(e.to_string()))
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Usage(format!("tolerance must be a non-negative number, got {t}")));
        }
    }
    match cli.command {
        Command::Analyze { state, level, splits, chain } => {
            let input = input::read_state(&state, cli.tol)?;
            let mode = match (level, splits, chain) {
                (Some(k), _, _) => AnalyzeMode::Level(k),
                (_, Some(_), _) => AnalyzeMode::AllSplits,
                (_, _, true) => AnalyzeMode::Chain,
                _ => AnalyzeMode::Overview,
            };
            let report = commands::analyze(&input, mode)?;
            emit(&json(&commands::wrap(&input, report)?)?, None)
        }
        Command::Robustness { state, noise, criterion, format } => {
            let input = input::read_state(&state, cli.tol)?;
            let r = commands::robustness(&input, &noise, &criterion)?;
            if format == "csv" {
                emit(&commands::robustness_csv(&r, input.rho.n_qubits())?, None)
            } else {
                emit(&json(&commands::wrap(&input, r)?)?, None)
            }
        }
        Command::Settings { state, profile, row } => {
            let input = input::read_state(&state, cli.tol)?;
            let profile = profile.as_deref().map(commands::parse_profile).transpose()?;
            let report = commands::settings(&input, profile, row)?;
            emit(&json(&commands::wrap(&input, report)?)?, None)
        }
        Command::Classify { state, method } => {
            let input = input::read_state(&state, cli.tol)?;
            let report = commands::classify(&input, &method)?;
            emit(&json(&commands::wrap(&input, report)?)?, None)
        }
        Command::Tables { which, out } => {
            let text = match which.as_str() {
                "tabel1" => commands::solution_table(2)?,
                "tabel2" => commands::solution_table(3)?,
                _ => commands::ghz_table()?,
            };
            emit(&text, out)
        }
        Command::Figures { which, out } => {
            let fig: Figure = which.parse().map_err(|e: entcert::robustness::RobustnessError| CliError::Usage(e.to_string()))?;
            emit(&commands::figure_csv(fig)?, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("entcert: {e}");
            ExitCode::from(e.code())
        }
    }
}
