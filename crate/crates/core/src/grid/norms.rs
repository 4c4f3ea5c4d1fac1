use serde::{Deserialize, Serialize};

use super::{ScalarField, State};
use crate::error::{Error, Result};

/// Discrete `L^p(Omega)` norm with cell-volume quadrature; `p = inf` gives
/// the max norm.
pub fn lp_norm(field: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(field.sup_norm());
    }
    let vol = field.domain().cell_volume();
    let norm = if p == 1.0 {
        field.values().iter().map(|v| v.abs()).sum::<f64>() * vol
    } else if p == 2.0 {
        (field.values().iter().map(|v| v * v).sum::<f64>() * vol).sqrt()
    } else {
        (field.values().iter().map(|v| v.abs().powf(p)).sum::<f64>() * vol).powf(1.0 / p)
    };
    Ok(norm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSummary {
    pub per_species: Vec<f64>,
    /// `sum_i alpha_i * per_species[i]`.
    pub total: f64,
}

/// Per-species integrals and their weighted total (weights default to 1).
pub fn total_mass(state: &State, weights: Option<&[f64]>) -> MassSummary {
    let vol = state.domain().cell_volume();
    let per_species: Vec<f64> = state.fields.iter().map(|f| f.sum() * vol).collect();
    let total = match weights {
        Some(w) => per_species.iter().zip(w).map(|(m, a)| m * a).sum(),
        None => per_species.iter().sum(),
    };
    MassSummary { per_species, total }
}
