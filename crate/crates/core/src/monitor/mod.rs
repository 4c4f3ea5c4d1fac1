//! Monitored quantities of the a priori estimates: per-record norms and
//! masses, unit-time window aggregates, and the verdicts derived from them.

mod export;
mod verdicts;
mod window;

pub use export::{metrics_csv, windows_csv, write_metrics_csv, write_windows_csv};
pub use verdicts::{issue_verdicts, Assessment, Status, Verdicts, MASS_REL_TOL, MONOTONE_REL_TOL, TREND_REL_SLACK};
pub use window::{WindowAccumulator, WindowAggregate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{lp_norm, BoxDomain, State};
use crate::integrate::Observer;

/// Norms and masses of one committed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub t: f64,
    pub l1: Vec<f64>,
    pub linf: Vec<f64>,
    pub total_weighted_mass: f64,
    pub min_value: f64,
    pub clamped_mass_cumulative: f64,
    /// `|| sum_i alpha_i u_i ||_inf`.
    pub weighted_sum_linf: f64,
}

impl MetricRecord {
    pub fn max_linf(&self) -> f64 {
        self.linf.iter().copied().fold(0.0, f64::max)
    }
}

/// Computes a [`MetricRecord`]; a non-finite state is reported as blow-up.
pub fn record(state: &State, clamped_mass: f64, weights: Option<&[f64]>) -> Result<MetricRecord> {
    if !state.is_finite() {
        return Err(Error::BlowUp { t: state.t, sup: f64::INFINITY });
    }
    let ones = vec![1.0; state.m()];
    let weights = weights.unwrap_or(&ones);
    let l1: Vec<f64> = state.fields.iter().map(|f| lp_norm(f, 1.0)).collect::<Result<_>>()?;
    let linf: Vec<f64> = state.fields.iter().map(|f| f.sup_norm()).collect();
    let vol = state.domain().cell_volume();
    let total_weighted_mass = state.fields.iter().zip(weights).map(|(f, w)| w * f.sum() * vol).sum();
    let mut weighted_sum = vec![0.0; state.domain().len()];
    for (f, w) in state.fields.iter().zip(weights) {
        for (s, v) in weighted_sum.iter_mut().zip(f.values()) {
            *s += w * v;
        }
    }
    let weighted_sum_linf = weighted_sum.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(MetricRecord {
        t: state.t,
        l1,
        linf,
        total_weighted_mass,
        min_value: state.min_value(),
        clamped_mass_cumulative: clamped_mass,
        weighted_sum_linf,
    })
}

/// Records every observed state and aggregates unit-time windows.
#[derive(Debug, Clone)]
pub struct Monitor {
    weights: Option<Vec<f64>>,
    window_width: f64,
    records: Vec<MetricRecord>,
    windows: Vec<WindowAggregate>,
    current: Option<WindowAccumulator>,
    domain: Option<BoxDomain>,
}

impl Monitor {
    pub fn new(weights: Option<Vec<f64>>, window_width: f64) -> Result<Self> {
        if !(window_width.is_finite() && window_width > 0.0) {
            return Err(Error::Config(format!("window width {window_width} must be positive")));
        }
        Ok(Self { weights, window_width, records: Vec::new(), windows: Vec::new(), current: None, domain: None })
    }

    pub fn window_width(&self) -> f64 {
        self.window_width
    }

    pub fn records(&self) -> &[MetricRecord] {
        &self.records
    }

    /// Completed windows, in order.
    pub fn windows(&self) -> &[WindowAggregate] {
        &self.windows
    }

    pub fn domain(&self) -> Option<&BoxDomain> {
        self.domain.as_ref()
    }

    /// Window in progress, closed as an incomplete aggregate.
    pub fn partial_window(&self) -> Option<WindowAggregate> {
        self.current.as_ref().filter(|w| w.has_samples()).map(|w| w.snapshot(false))
    }

    pub fn push(&mut self, state: &State, clamped_cumulative: f64) -> Result<&MetricRecord> {
        let rec = record(state, clamped_cumulative, self.weights.as_deref())?;
        if let Some(last) = self.records.last() {
            if rec.t <= last.t {
                return Err(Error::Precondition(format!("record times must increase ({} after {})", rec.t, last.t)));
            }
        }
        if self.domain.is_none() {
            self.domain = Some((**state.domain()).clone());
        }
        let sup = rec.max_linf();
        match self.current.as_mut() {
            None => self.current = Some(WindowAccumulator::start(0.0_f64.min(rec.t), self.window_width, state, sup)),
            Some(acc) => {
                acc.accumulate(state, sup);
                if acc.is_complete() {
                    let done = self.current.take().expect("window in progress");
                    let next_tau = done.tau() + self.window_width;
                    self.windows.push(done.close());
                    self.current = Some(WindowAccumulator::start(next_tau, self.window_width, state, sup));
                }
            }
        }
        self.records.push(rec);
        Ok(self.records.last().expect("just pushed"))
    }
}

impl Observer for Monitor {
    fn observe(&mut self, state: &State, clamped_cumulative: f64) -> Result<()> {
        self.push(state, clamped_cumulative).map(|_| ())
    }
}
