use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::config::RunConfig;
use super::svg::emit_svg;
use super::ExitStatus;
use crate::error::{Error, Result};
use crate::grid::snapshot::{write_atomic, write_snapshot};
use crate::grid::{ScalarField, State};
use crate::integrate::{run, Cadence, Observer, Termination};
use crate::monitor::{self, issue_verdicts, write_metrics_csv, write_windows_csv, MetricRecord, Monitor, Verdicts};
use crate::systems::{
    augment, check_mass_balance, check_quasi_positivity, growth_degree, BalanceClass, CheckerReport, GrowthReport,
    MassBalance, MassBalanceReport, Verdict,
};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub quasi_positivity: CheckerReport,
    pub mass_balance: MassBalanceReport,
    pub growth: GrowthReport,
}

impl CheckSummary {
    pub fn refuted(&self) -> bool {
        self.quasi_positivity.verdict == Verdict::Refuted || self.mass_balance.outcome == MassBalance::Violated
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Blowup,
    PositivityFailure,
    ClampBudget,
    NumericError,
    StructuralRefuted,
}

impl From<Termination> for Outcome {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Completed => Outcome::Completed,
            Termination::Blowup => Outcome::Blowup,
            Termination::PositivityFailure => Outcome::PositivityFailure,
            Termination::ClampBudget => Outcome::ClampBudget,
            Termination::NumericError => Outcome::NumericError,
        }
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub config: RunConfig,
    pub checks: CheckSummary,
    pub balance_class: BalanceClass,
    pub forced: bool,
    pub augmentation_applied: bool,
    pub outcome: Outcome,
    pub exit_code: i32,
    pub message: Option<String>,
    pub blowup_time: Option<f64>,
    pub wall_time_seconds: f64,
    pub steps: usize,
    pub retries: usize,
    pub clamped_mass: f64,
    pub final_metrics: Option<MetricRecord>,
    pub verdicts: Option<Verdicts>,
    /// Files written next to the report, relative to the output directory.
    pub manifest: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub force: bool,
    /// Overrides `output.directory`.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub report: RunReport,
    pub status: ExitStatus,
    pub out_dir: PathBuf,
}

pub fn run_checks(cfg: &RunConfig) -> Result<CheckSummary> {
    let draft = cfg.system.build()?;
    let n = cfg.checks.sample_count;
    let seed = cfg.checks.seed;
    Ok(CheckSummary {
        quasi_positivity: check_quasi_positivity(&draft.field, n, seed),
        mass_balance: check_mass_balance(&draft.field, draft.weights.as_deref(), n, seed),
        growth: growth_degree(&draft.field),
    })
}

/// Writes field snapshots of every `every`-th observed state.
struct SnapshotWriter {
    every: Option<usize>,
    dir: PathBuf,
    seen: usize,
    written: Vec<PathBuf>,
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, state: &State, _: f64) -> Result<()> {
        if let Some(every) = self.every {
            if self.seen.is_multiple_of(every) {
                std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
                for (i, f) in state.fields.iter().enumerate() {
                    let path = self.dir.join(format!("u{}_r{:06}.rdm", i + 1, self.seen));
                    write_snapshot(&path, f)?;
                    self.written.push(path);
                }
            }
        }
        self.seen += 1;
        Ok(())
    }
}

fn relative(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).unwrap_or(path).to_string_lossy().replace('\\', "/")
}

/// Runs checks, optional augmentation, simulation, monitoring and verdicts,
/// writing all artifacts to the output directory. Snapshot initial data
/// resolve against `config_dir`.
pub fn execute(cfg: &RunConfig, config_dir: &Path, opts: &RunOptions) -> Result<Execution> {
    let start = Instant::now();
    let out_dir = opts.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let draft = cfg.system.build()?;
    let checks = run_checks(cfg)?;
    let domain = Arc::new(cfg.domain.build()?);
    let initial = cfg.initial.build(&domain, draft.m(), config_dir)?;

    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        checks: checks.clone(),
        balance_class: BalanceClass::Unknown,
        forced: opts.force,
        augmentation_applied: false,
        outcome: Outcome::StructuralRefuted,
        exit_code: ExitStatus::StructuralRefuted.code(),
        message: None,
        blowup_time: None,
        wall_time_seconds: 0.0,
        steps: 0,
        retries: 0,
        clamped_mass: 0.0,
        final_metrics: None,
        verdicts: None,
        manifest: Vec::new(),
    };

    if checks.refuted() && !opts.force {
        report.message = Some("structural check refuted; rerun with --force to simulate anyway".into());
        report.wall_time_seconds = start.elapsed().as_secs_f64();
        write_report(&out_dir, &report)?;
        return Ok(Execution { report, status: ExitStatus::StructuralRefuted, out_dir });
    }

    let class = draft.class.unwrap_or(match checks.mass_balance.outcome {
        MassBalance::Conservative => BalanceClass::Conservative,
        MassBalance::Dissipative => BalanceClass::Dissipative,
        MassBalance::Violated => BalanceClass::Unknown,
    });
    let mut system = draft.finish(class)?;
    let mut initial = initial;
    if cfg.system.reduce_to_conservative() {
        system = augment(&system).map_err(|e| Error::Config(format!("system.reduce_to_conservative: {e}")))?;
        initial.fields.push(ScalarField::zeros(domain.clone()));
        report.augmentation_applied = true;
    }
    report.balance_class = system.balance_class();

    let mut monitor = Monitor::new(system.weights().map(<[f64]>::to_vec), cfg.monitor.window_w)?;
    let mut snapshots = SnapshotWriter {
        every: cfg.output.snapshot_every,
        dir: out_dir.join("snapshots"),
        seen: 0,
        written: Vec::new(),
    };
    let cadence = Cadence { record_every: cfg.monitor.record_every, boundary_every: cfg.monitor.window_w };
    let summary = run(&system, initial, &cfg.integrator, cadence, (&mut monitor, &mut snapshots))?;

    report.outcome = summary.termination.into();
    report.message = summary.message.clone();
    report.blowup_time = summary.blowup_time;
    report.steps = summary.steps;
    report.retries = summary.retries;
    report.clamped_mass = summary.clamped_mass;
    report.final_metrics = monitor::record(&summary.final_state, summary.clamped_mass, system.weights()).ok();

    let status = match summary.termination {
        Termination::Completed => {
            let verdicts = issue_verdicts(&system, domain.dim(), monitor.records(), monitor.windows())?;
            let failed = verdicts.any_failed();
            report.verdicts = Some(verdicts);
            if failed {
                ExitStatus::VerdictFailed
            } else {
                ExitStatus::Pass
            }
        }
        Termination::Blowup => ExitStatus::BlowUp,
        Termination::PositivityFailure | Termination::ClampBudget => ExitStatus::Positivity,
        Termination::NumericError => ExitStatus::Numeric,
    };
    report.exit_code = status.code();

    let mut written = snapshots.written;
    let metrics = out_dir.join("metrics.csv");
    write_metrics_csv(&metrics, monitor.records())?;
    written.push(metrics);
    let mut windows = monitor.windows().to_vec();
    windows.extend(monitor.partial_window());
    let windows_path = out_dir.join("windows.csv");
    write_windows_csv(&windows_path, &windows)?;
    written.push(windows_path);
    if cfg.output.emit_svg {
        written.extend(emit_svg(monitor.records(), monitor.windows(), &out_dir)?);
    }
    report.manifest = written.iter().map(|p| relative(p, &out_dir)).collect();
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    write_report(&out_dir, &report)?;
    Ok(Execution { report, status, out_dir })
}

fn write_report(dir: &Path, report: &RunReport) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))?;
    json.push('\n');
    write_atomic(&dir.join("report.json"), json.as_bytes())
}
