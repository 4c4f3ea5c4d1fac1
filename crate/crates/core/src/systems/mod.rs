//! Reaction systems: polynomial nonlinearities, structural checkers, the
//! conservative augmentation and the built-in example systems.

mod builtins;
mod checks;
mod polynomial;

pub use builtins::{lotka_volterra, reversible};
pub use checks::{
    check_mass_balance, check_quasi_positivity, growth_degree, CheckMethod, CheckerReport, GrowthReport,
    MassBalance, MassBalanceReport, Verdict, Witness, SAMPLE_HI, SAMPLE_LO, VIOLATION_TOL,
};
pub use polynomial::{CompiledField, Polynomial, PolynomialVectorField, Term};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared mass-balance behaviour of a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceClass {
    Conservative,
    Dissipative,
    Unknown,
}

/// A reaction-diffusion system `du_i/dt - d_i Lap u_i = f_i(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    d: Vec<f64>,
    field: PolynomialVectorField,
    balance_class: BalanceClass,
    weights: Option<Vec<f64>>,
}

impl SystemSpec {
    pub fn new(
        d: Vec<f64>,
        field: PolynomialVectorField,
        balance_class: BalanceClass,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = field.m();
        if d.len() != m {
            return Err(Error::InvalidArgument(format!("{} diffusion coefficients for {m} species", d.len())));
        }
        if let Some((i, di)) = d.iter().enumerate().find(|(_, di)| !(di.is_finite() && **di > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "diffusion coefficient d_{} = {di} must be positive (hypothesis D)",
                i + 1
            )));
        }
        if let Some(w) = &weights {
            if w.len() != m {
                return Err(Error::InvalidArgument(format!("{} weights for {m} species", w.len())));
            }
            if let Some((i, wi)) = w.iter().enumerate().find(|(_, wi)| !(wi.is_finite() && **wi > 0.0)) {
                return Err(Error::InvalidArgument(format!("weight alpha_{} = {wi} must be positive", i + 1)));
            }
        }
        Ok(Self { d, field, balance_class, weights })
    }

    pub fn m(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn d_max(&self) -> f64 {
        self.d.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn d_min(&self) -> f64 {
        self.d.iter().copied().fold(f64::MAX, f64::min)
    }

    pub fn equal_diffusion(&self) -> bool {
        self.d.iter().all(|&di| di == self.d[0])
    }

    pub fn field(&self) -> &PolynomialVectorField {
        &self.field
    }

    pub fn balance_class(&self) -> BalanceClass {
        self.balance_class
    }

    pub fn with_balance_class(mut self, class: BalanceClass) -> Self {
        self.balance_class = class;
        self
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weights, defaulting to all ones.
    pub fn weights_or_ones(&self) -> Vec<f64> {
        self.weights.clone().unwrap_or_else(|| vec![1.0; self.m()])
    }
}

/// Appends a species `u_{m+1}` with unit diffusion and reaction
/// `-sum_i alpha_i f_i(u)`, which turns a dissipative system into a
/// conservative one. The new species starts from the zero field.
///
/// With weights `alpha` the augmented system carries weights `(alpha, 1)`;
/// without weights the plain sum is used.
pub fn augment(system: &SystemSpec) -> Result<SystemSpec> {
    match system.balance_class {
        BalanceClass::Conservative | BalanceClass::Dissipative => {}
        BalanceClass::Unknown => {
            return Err(Error::Precondition(
                "augmentation requires a conservative or dissipative system; balance class is unknown".into(),
            ))
        }
    }
    let m = system.m();
    let weights = system.weights_or_ones();
    let neg_sum = Polynomial::linear_combination(m, weights.iter().map(|w| -w).zip(system.field.components()))?;

    let mut components: Vec<Polynomial> = system.field.components().iter().map(|p| p.widen(m + 1)).collect();
    components.push(neg_sum.widen(m + 1));
    let field = PolynomialVectorField::new(components)?;

    let mut d = system.d.clone();
    d.push(1.0);
    let weights = system.weights.as_ref().map(|w| {
        let mut w = w.clone();
        w.push(1.0);
        w
    });
    SystemSpec::new(d, field, BalanceClass::Conservative, weights)
}
