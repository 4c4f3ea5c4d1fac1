use serde::{Deserialize, Serialize};

use super::{IntegratorConfig, Stepper};
use crate::error::{Error, Result};
use crate::grid::{total_mass, State};
use crate::systems::SystemSpec;

/// When the run loop hands the state to its observer: the initial state,
/// every `record_every` accepted steps, and exactly at every multiple of
/// `boundary_every` (and at `t_end`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cadence {
    pub record_every: usize,
    pub boundary_every: f64,
}

impl Default for Cadence {
    fn default() -> Self {
        Self { record_every: 10, boundary_every: 1.0 }
    }
}

/// Receives committed states from [`run`].
pub trait Observer {
    fn observe(&mut self, state: &State, clamped_cumulative: f64) -> Result<()>;
}

impl<T: Observer + ?Sized> Observer for &mut T {
    fn observe(&mut self, state: &State, clamped_cumulative: f64) -> Result<()> {
        (**self).observe(state, clamped_cumulative)
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn observe(&mut self, state: &State, clamped_cumulative: f64) -> Result<()> {
        self.0.observe(state, clamped_cumulative)?;
        self.1.observe(state, clamped_cumulative)
    }
}

/// Observer that ignores everything.
impl Observer for () {
    fn observe(&mut self, _: &State, _: f64) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Blowup,
    PositivityFailure,
    ClampBudget,
    NumericError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub termination: Termination,
    /// Last committed state.
    pub final_state: State,
    pub steps: usize,
    pub retries: usize,
    pub clamped_mass: f64,
    pub initial_mass: f64,
    /// Detection time of blow-up, an empirical proxy for the maximal
    /// existence time.
    pub blowup_time: Option<f64>,
    pub message: Option<String>,
}

/// Integrates from `initial` to `cfg.t_end`.
///
/// Step failures end the run with the matching [`Termination`]; only
/// invalid inputs and observer failures are returned as errors.
pub fn run(
    system: &SystemSpec,
    initial: State,
    cfg: &IntegratorConfig,
    cadence: Cadence,
    mut observer: impl Observer,
) -> Result<RunSummary> {
    if !initial.is_finite() {
        return Err(Error::Precondition("initial data must be finite".into()));
    }
    if initial.min_value() < 0.0 {
        return Err(Error::Precondition(format!(
            "initial data must be nonnegative (min {})",
            initial.min_value()
        )));
    }
    if !(cadence.boundary_every.is_finite() && cadence.boundary_every > 0.0) || cadence.record_every == 0 {
        return Err(Error::Config(format!("invalid record cadence {cadence:?}")));
    }
    let stepper = Stepper::new(system, cfg, &initial)?;

    let initial_mass = total_mass(&initial, None).total;
    let blowup_level = cfg.blowup_factor * (1.0 + initial.sup_norm());
    let clamp_limit = cfg.clamp_budget * initial_mass;

    let mut state = initial;
    let mut clamped = 0.0;
    let mut steps = 0;
    let mut retries = 0;
    let mut since_record = 0;
    let mut dt_cur = cfg.dt;
    let mut boundary_index = 1u64;
    let next_boundary = |k: u64| (k as f64 * cadence.boundary_every).min(cfg.t_end);
    let mut boundary = next_boundary(boundary_index);

    observer.observe(&state, clamped)?;

    let finish = |termination, state: State, steps, retries, clamped, blowup_time, message| RunSummary {
        termination,
        final_state: state,
        steps,
        retries,
        clamped_mass: clamped,
        initial_mass,
        blowup_time,
        message,
    };

    while state.t < cfg.t_end {
        let remaining = boundary - state.t;
        let hits = remaining <= dt_cur * (1.0 + 1e-6);
        let dt_try = if hits { remaining } else { dt_cur };

        let outcome = match stepper.step(&state, dt_try) {
            Ok(o) => o,
            Err(err) => {
                let (termination, blowup_time) = match &err {
                    Error::BlowUp { t, .. } => (Termination::Blowup, Some(*t)),
                    Error::Positivity { .. } => (Termination::PositivityFailure, None),
                    Error::ClampBudget { .. } => (Termination::ClampBudget, None),
                    _ => (Termination::NumericError, None),
                };
                return Ok(finish(termination, state, steps, retries, clamped, blowup_time, Some(err.to_string())));
            }
        };

        steps += 1;
        retries += outcome.retries;
        clamped += outcome.clamped_mass;
        let reached = hits && outcome.retries == 0;
        let base = if outcome.retries > 0 { outcome.dt_used } else { dt_cur };
        dt_cur = (2.0 * base).min(cfg.dt);
        state = outcome.state;
        if reached {
            state.t = boundary;
        }

        let sup = state.sup_norm();
        if !sup.is_finite() || sup > blowup_level {
            let t = state.t;
            let msg = format!("sup norm {sup:e} exceeded blow-up level {blowup_level:e} at t = {t}");
            return Ok(finish(Termination::Blowup, state, steps, retries, clamped, Some(t), Some(msg)));
        }
        if clamped > clamp_limit {
            let msg = Error::ClampBudget { clamped, budget: clamp_limit }.to_string();
            return Ok(finish(Termination::ClampBudget, state, steps, retries, clamped, None, Some(msg)));
        }

        since_record += 1;
        if reached {
            observer.observe(&state, clamped)?;
            since_record = 0;
            boundary_index += 1;
            boundary = next_boundary(boundary_index);
        } else if since_record >= cadence.record_every {
            observer.observe(&state, clamped)?;
            since_record = 0;
        }
    }
    Ok(finish(Termination::Completed, state, steps, retries, clamped, None, None))
}
