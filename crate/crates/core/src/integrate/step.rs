//! Single time steps with the positivity guard.
//!
//! Every scheme follows the same policy: a trial update whose minimum falls
//! below `-positivity_tol * (1 + ||u^n||_inf)` is rejected and retried with
//! half the step, at most `max_retries` times. Negative values that survive
//! within that tolerance are clamped to zero and their mass is reported.

use rayon::prelude::*;

use super::{IntegratorConfig, Scheme};
use crate::error::{Error, Result};
use crate::grid::laplacian::apply_into;
use crate::grid::{HelmholtzSolver, ScalarField, State};
use crate::systems::{CompiledField, SystemSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: State,
    pub dt_used: f64,
    pub clamped_mass: f64,
    pub retries: usize,
}

/// Caches the compiled reaction field and the Helmholtz plans for one
/// system on one domain.
#[derive(Debug)]
pub struct Stepper<'a> {
    system: &'a SystemSpec,
    cfg: &'a IntegratorConfig,
    field: CompiledField,
    solver: Option<HelmholtzSolver>,
}

impl<'a> Stepper<'a> {
    pub fn new(system: &'a SystemSpec, cfg: &'a IntegratorConfig, state: &State) -> Result<Self> {
        cfg.validate()?;
        if state.m() != system.m() {
            return Err(Error::Precondition(format!(
                "state has {} species, system has {}",
                state.m(),
                system.m()
            )));
        }
        if cfg.scheme.is_explicit() {
            let limit = explicit_dt_limit(system, state, cfg);
            if cfg.dt > limit {
                return Err(Error::Stability { dt: cfg.dt, limit });
            }
        }
        let solver = (!cfg.scheme.is_explicit()).then(|| HelmholtzSolver::new(state.domain().clone()));
        Ok(Self { system, cfg, field: system.field().compile(), solver })
    }

    pub fn config(&self) -> &IntegratorConfig {
        self.cfg
    }

    /// Advances `state` by at most `dt_try`, halving on positivity failure.
    pub fn step(&self, state: &State, dt_try: f64) -> Result<StepOutcome> {
        if state.domain() != self.solver.as_ref().map_or(state.domain(), |s| s.domain()) {
            return Err(Error::Precondition("state domain differs from the solver domain".into()));
        }
        let threshold = self.cfg.negativity_threshold(state);
        let u: Vec<&[f64]> = state.fields.iter().map(ScalarField::values).collect();
        let mut dt = dt_try;
        let mut retries = 0;
        let mut next = loop {
            let (trial, min) = match self.cfg.scheme {
                Scheme::ImexEuler => self.imex_trial(&u, dt)?,
                Scheme::ExplicitEuler => self.explicit_euler_trial(state, &u, dt)?,
                Scheme::ExplicitRk2 => self.explicit_rk2_trial(state, &u, dt)?,
            };
            if trial.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::BlowUp { t: state.t + dt, sup: f64::INFINITY });
            }
            if min >= threshold {
                break trial;
            }
            if retries >= self.cfg.max_retries {
                return Err(Error::Positivity { t: state.t, retries, min_value: min });
            }
            retries += 1;
            dt *= 0.5;
        };

        let cell_volume = state.domain().cell_volume();
        let mut clamped = 0.0;
        for v in next.iter_mut().flatten() {
            if *v < 0.0 {
                if *v < threshold {
                    return Err(Error::Positivity { t: state.t + dt, retries, min_value: *v });
                }
                clamped -= *v * cell_volume;
                *v = 0.0;
            }
        }
        let mass: f64 = state.fields.iter().map(|f| f.sum()).sum::<f64>() * cell_volume;
        let budget = self.cfg.clamp_budget * mass;
        if clamped > budget {
            return Err(Error::ClampBudget { clamped, budget });
        }

        let domain = state.domain().clone();
        let fields = next
            .into_iter()
            .map(|values| ScalarField::new(domain.clone(), values))
            .collect::<Result<Vec<_>>>()?;
        Ok(StepOutcome { state: State { fields, t: state.t + dt }, dt_used: dt, clamped_mass: clamped, retries })
    }

    /// `out_i = base_i + dt * f_i(u)` cell by cell; returns the minimum.
    fn reaction_update(&self, base: &[&[f64]], u: &[&[f64]], dt: f64, out: &mut [Vec<f64>]) -> f64 {
        let m = u.len();
        let mut cell = vec![0.0; m];
        let mut rate = vec![0.0; m];
        let mut min = f64::INFINITY;
        for k in 0..u[0].len() {
            for i in 0..m {
                cell[i] = u[i][k];
            }
            self.field.eval_into(&cell, &mut rate);
            for i in 0..m {
                let v = base[i][k] + dt * rate[i];
                out[i][k] = v;
                min = min.min(v);
            }
        }
        min
    }

    /// Two-stage SSP reaction predictor followed by per-species implicit
    /// diffusion `(I - dt d_i Lap_h) u_i^{n+1} = u_i^*`.
    fn imex_trial(&self, u: &[&[f64]], dt: f64) -> Result<(Vec<Vec<f64>>, f64)> {
        let len = u[0].len();
        let mut stage: Vec<Vec<f64>> = vec![vec![0.0; len]; u.len()];
        let min1 = self.reaction_update(u, u, dt, &mut stage);
        let stage_refs: Vec<&[f64]> = stage.iter().map(Vec::as_slice).collect();
        let mut second: Vec<Vec<f64>> = vec![vec![0.0; len]; u.len()];
        self.reaction_update(&stage_refs, &stage_refs, dt, &mut second);
        let mut min = min1;
        for (s, base) in second.iter_mut().zip(u) {
            for (v, b) in s.iter_mut().zip(base.iter()) {
                *v = 0.5 * (b + *v);
                min = min.min(*v);
            }
        }
        let solver = self.solver.as_ref().expect("IMEX stepper owns a solver");
        let d = self.system.d();
        second.par_iter_mut().enumerate().for_each(|(i, values)| solver.solve_in_place(dt * d[i], values));
        let min_after = second.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        Ok((second, min.min(min_after)))
    }

    /// `F_i(u) = d_i Lap_h u_i + f_i(u)` applied as `out = base + dt F(u)`.
    fn explicit_update(&self, state: &State, base: &[&[f64]], u: &[&[f64]], dt: f64) -> (Vec<Vec<f64>>, f64) {
        let len = u[0].len();
        let mut out: Vec<Vec<f64>> = vec![vec![0.0; len]; u.len()];
        self.reaction_update(base, u, dt, &mut out);
        let mut lap = vec![0.0; len];
        let mut min = f64::INFINITY;
        for (i, o) in out.iter_mut().enumerate() {
            apply_into(state.domain(), u[i], &mut lap);
            let coef = dt * self.system.d()[i];
            for (v, l) in o.iter_mut().zip(&lap) {
                *v += coef * l;
                min = min.min(*v);
            }
        }
        (out, min)
    }

    fn explicit_euler_trial(&self, state: &State, u: &[&[f64]], dt: f64) -> Result<(Vec<Vec<f64>>, f64)> {
        Ok(self.explicit_update(state, u, u, dt))
    }

    fn explicit_rk2_trial(&self, state: &State, u: &[&[f64]], dt: f64) -> Result<(Vec<Vec<f64>>, f64)> {
        let (half, _) = self.explicit_update(state, u, u, 0.5 * dt);
        let half_refs: Vec<&[f64]> = half.iter().map(Vec::as_slice).collect();
        Ok(self.explicit_update(state, u, &half_refs, dt))
    }
}

/// Largest stable explicit step: `cfl_safety / sum_j (2 d_max / h_j^2)`.
pub fn explicit_dt_limit(system: &SystemSpec, state: &State, cfg: &IntegratorConfig) -> f64 {
    let d_max = system.d_max();
    let rate: f64 = state.domain().spacing().iter().map(|h| 2.0 * d_max / (h * h)).sum();
    cfg.cfl_safety / rate
}

/// One IMEX step at the configured `dt` (halved as needed).
pub fn step_imex(system: &SystemSpec, state: &State, cfg: &IntegratorConfig) -> Result<StepOutcome> {
    let cfg = IntegratorConfig { scheme: Scheme::ImexEuler, ..cfg.clone() };
    Stepper::new(system, &cfg, state)?.step(state, cfg.dt)
}

/// One explicit step; `cfg.scheme` selects Euler or midpoint (defaults to
/// Euler when an IMEX scheme is configured).
pub fn step_explicit(system: &SystemSpec, state: &State, cfg: &IntegratorConfig) -> Result<StepOutcome> {
    let scheme = if cfg.scheme.is_explicit() { cfg.scheme } else { Scheme::ExplicitEuler };
    let cfg = IntegratorConfig { scheme, ..cfg.clone() };
    Stepper::new(system, &cfg, state)?.step(state, cfg.dt)
}
