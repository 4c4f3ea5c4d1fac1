use std::sync::Arc;

use super::BoxDomain;
use crate::error::{Error, Result};

/// Cell-centered values of one species on a [`BoxDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain: Arc<BoxDomain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: Arc<BoxDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, domain has {} cells",
                values.len(),
                domain.len()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: Arc<BoxDomain>, c: f64) -> Self {
        let values = vec![c; domain.len()];
        Self { domain, values }
    }

    pub fn zeros(domain: Arc<BoxDomain>) -> Self {
        Self::constant(domain, 0.0)
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(domain: Arc<BoxDomain>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..domain.len()).map(|k| f(&domain.center(k))).collect();
        Self { domain, values }
    }

    pub fn domain(&self) -> &Arc<BoxDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Plain cell sum (no volume factor).
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// The concentrations `(u_1, ..., u_m)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub fields: Vec<ScalarField>,
    pub t: f64,
}

impl State {
    pub fn new(fields: Vec<ScalarField>, t: f64) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::InvalidArgument("state needs at least one species".into()))?;
        if fields.iter().any(|f| f.domain() != first.domain()) {
            return Err(Error::InvalidArgument("all species must share one domain".into()));
        }
        Ok(Self { fields, t })
    }

    /// Spatially constant state with one value per species.
    pub fn constant(domain: Arc<BoxDomain>, values: &[f64]) -> Result<Self> {
        let fields = values.iter().map(|&c| ScalarField::constant(domain.clone(), c)).collect();
        Self::new(fields, 0.0)
    }

    pub fn m(&self) -> usize {
        self.fields.len()
    }

    pub fn domain(&self) -> &Arc<BoxDomain> {
        self.fields[0].domain()
    }

    pub fn species(&self, i: usize) -> &ScalarField {
        &self.fields[i]
    }

    /// `max_i ||u_i||_inf`.
    pub fn sup_norm(&self) -> f64 {
        self.fields.iter().map(ScalarField::sup_norm).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.fields.iter().map(ScalarField::min_value).fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(ScalarField::is_finite)
    }

    /// Values of all species in cell `k`.
    pub fn cell(&self, k: usize) -> Vec<f64> {
        self.fields.iter().map(|f| f.values()[k]).collect()
    }

    /// Pointwise sum `sum_i u_i`.
    pub fn species_sum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.domain().len()];
        for f in &self.fields {
            for (o, v) in out.iter_mut().zip(f.values()) {
                *o += v;
            }
        }
        out
    }
}
