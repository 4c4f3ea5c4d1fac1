//! Command-line front end: `rdmass run`, `rdmass check`, `rdmass oracle`.

pub mod config;
mod execute;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{load_config, RunConfig};
pub use execute::{execute, run_checks, CheckSummary, Execution, Outcome, RunOptions, RunReport, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::integrate::wellmixed_oracle;
use crate::systems::BalanceClass;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass,
    VerdictFailed,
    StructuralRefuted,
    Positivity,
    BlowUp,
    Config,
    Numeric,
    Io,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::VerdictFailed => 1,
            ExitStatus::StructuralRefuted => 2,
            ExitStatus::Positivity => 3,
            ExitStatus::BlowUp => 4,
            ExitStatus::Config => 64,
            ExitStatus::Numeric => 70,
            ExitStatus::Io => 74,
        }
    }

    pub fn from_error(err: &Error) -> Self {
        match err {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Precondition(_) => ExitStatus::Config,
            Error::Io { .. } => ExitStatus::Io,
            Error::BlowUp { .. } => ExitStatus::BlowUp,
            Error::Positivity { .. } | Error::ClampBudget { .. } => ExitStatus::Positivity,
            Error::Stability { .. } => ExitStatus::Config,
            Error::Format(_) | Error::EvaluationOverflow { .. } | Error::SolverDivergence { .. } => {
                ExitStatus::Numeric
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rdmass", version, about = "Simulate and verify mass-dissipating reaction-diffusion systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check, simulate, monitor and write artifacts.
    Run {
        config: PathBuf,
        /// Simulate even if a structural check is refuted.
        #[arg(long)]
        force: bool,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the structural checks only and print them as JSON.
    Check { config: PathBuf },
    /// Integrate the well-mixed ODE for constant initial data.
    Oracle {
        config: PathBuf,
        #[arg(long = "t")]
        t: f64,
    },
}

fn config_dir(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RDMASS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("RDMASS_THREADS = {raw:?} must be a positive integer")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Prints a line, ignoring a closed stdout.
fn say(line: impl std::fmt::Display) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<ExitStatus> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, force, out } => {
            let cfg = load_config(&config)?;
            let exec = execute(&cfg, config_dir(&config), &RunOptions { force, out })?;
            let r = &exec.report;
            say(format!("outcome: {}", to_json(&r.outcome)?.trim_matches('"')));
            if let Some(msg) = &r.message {
                say(format!("message: {msg}"));
            }
            if let Some(v) = &r.verdicts {
                for (name, a) in v.iter() {
                    say(format!("{name}: {}", to_json(&a.status)?.trim_matches('"')));
                }
            }
            say(format!("report: {}", exec.out_dir.join("report.json").display()));
            Ok(exec.status)
        }
        Command::Check { config } => {
            let cfg = load_config(&config)?;
            let checks = run_checks(&cfg)?;
            say(to_json(&checks)?);
            Ok(if checks.refuted() { ExitStatus::StructuralRefuted } else { ExitStatus::Pass })
        }
        Command::Oracle { config, t } => {
            let cfg = load_config(&config)?;
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Config(format!("--t {t} must be a nonnegative time")));
            }
            let u0 = cfg
                .initial
                .constant_values()
                .ok_or_else(|| Error::Config("the well-mixed oracle needs constant initial data".into()))?;
            let system = cfg.system.build()?.finish(BalanceClass::Unknown)?;
            let u = wellmixed_oracle(&system, u0, t)?;
            say(to_json(&serde_json::json!({ "t": t, "u": u }))?);
            Ok(ExitStatus::Pass)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::Config.code() } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(status) => status.code(),
        Err(err) => {
            eprintln!("rdmass: error: {err}");
            ExitStatus::from_error(&err).code()
        }
    }
}
