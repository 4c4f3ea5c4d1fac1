//! Time integration of the semi-discrete system with a positivity guard,
//! blow-up detection and a well-mixed ODE reference solution.

mod config;
mod oracle;
mod run;
mod step;

pub use config::{IntegratorConfig, Scheme};
pub use oracle::{wellmixed_oracle, wellmixed_trajectory};
pub use run::{run, Cadence, Observer, RunSummary, Termination};
pub use step::{explicit_dt_limit, step_explicit, step_imex, StepOutcome, Stepper};
