use std::path::PathBuf;

/// Errors raised by the simulator, the checkers and the run pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("evaluation overflow in component f_{component} (non-finite value)")]
    EvaluationOverflow { component: usize },

    #[error("linear solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDivergence { iterations: usize, residual: f64 },

    #[error("time step {dt:e} exceeds explicit stability limit {limit:e}")]
    Stability { dt: f64, limit: f64 },

    #[error("positivity could not be restored at t = {t} after {retries} step halvings (min value {min_value:e})")]
    Positivity { t: f64, retries: usize, min_value: f64 },

    #[error("clamped mass {clamped:e} exceeds budget {budget:e}")]
    ClampBudget { clamped: f64, budget: f64 },

    #[error("blow-up detected at t = {t} (sup norm {sup:e})")]
    BlowUp { t: f64, sup: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
