use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Implicit Euler diffusion after a two-stage strong-stability-preserving
    /// explicit reaction predictor.
    #[default]
    ImexEuler,
    /// Forward Euler on reaction and diffusion together.
    ExplicitEuler,
    /// Explicit midpoint rule on reaction and diffusion together.
    ExplicitRk2,
}

impl Scheme {
    pub fn is_explicit(self) -> bool {
        !matches!(self, Scheme::ImexEuler)
    }
}

fn default_cfl_safety() -> f64 {
    0.5
}
fn default_positivity_tol() -> f64 {
    1e-12
}
fn default_clamp_budget() -> f64 {
    1e-8
}
fn default_max_retries() -> usize {
    30
}
fn default_blowup_factor() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl_safety")]
    pub cfl_safety: f64,
    #[serde(default = "default_positivity_tol")]
    pub positivity_tol: f64,
    /// Maximum cumulative clamped mass relative to the initial mass.
    #[serde(default = "default_clamp_budget")]
    pub clamp_budget: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: usize,
    #[serde(default = "default_blowup_factor")]
    pub blowup_factor: f64,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            cfl_safety: default_cfl_safety(),
            positivity_tol: default_positivity_tol(),
            clamp_budget: default_clamp_budget(),
            max_retries: default_max_retries(),
            blowup_factor: default_blowup_factor(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("integrator.{name} = {v} must be positive")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("positivity_tol", self.positivity_tol)?;
        positive("clamp_budget", self.clamp_budget)?;
        positive("blowup_factor", self.blowup_factor)?;
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config(format!("integrator.cfl_safety = {} must lie in (0, 1]", self.cfl_safety)));
        }
        if self.dt > self.t_end {
            return Err(Error::Config(format!("integrator.dt = {} exceeds t_end = {}", self.dt, self.t_end)));
        }
        Ok(())
    }

    /// Negativity threshold `-positivity_tol * (1 + ||u||_inf)` for a state.
    pub fn negativity_threshold(&self, state: &State) -> f64 {
        -self.positivity_tol * (1.0 + state.sup_norm())
    }
}
