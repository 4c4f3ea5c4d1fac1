//! Implicit diffusion solves `(I - a Lap_h) x = rhs`.
//!
//! The reflected-ghost Laplacian is diagonalized by the type-II cosine
//! transform along every axis, with per-axis eigenvalues
//! `-(2 / h^2) (1 - cos(pi k / N))`. Conjugate gradient on the same
//! operator is kept as an independent path.

use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use serde::{Deserialize, Serialize};

use super::laplacian::apply_helmholtz_into;
use super::{BoxDomain, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HelmholtzMethod {
    #[default]
    Cosine,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Stop when `||r||_inf <= rel_tol * ||rhs||_inf`.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-12, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

fn check_coefficient(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Helmholtz coefficient a = {a} must be positive")))
    }
}

/// Cosine-transform Helmholtz solver with plans cached for one domain.
pub struct HelmholtzSolver {
    domain: Arc<BoxDomain>,
    plans: Vec<Arc<dyn TransformType2And3<f64>>>,
    /// `(2 / h^2) (1 - cos(pi k / N))` per axis, i.e. minus the eigenvalues.
    symbols: Vec<Vec<f64>>,
    normalization: f64,
    scratch_len: usize,
}

impl std::fmt::Debug for HelmholtzSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HelmholtzSolver").field("domain", &self.domain).finish_non_exhaustive()
    }
}

impl HelmholtzSolver {
    pub fn new(domain: Arc<BoxDomain>) -> Self {
        let mut planner = DctPlanner::new();
        let plans: Vec<_> = domain.cells().iter().map(|&n| planner.plan_dct2(n)).collect();
        let symbols = domain
            .cells()
            .iter()
            .zip(domain.spacing())
            .map(|(&n, &h)| {
                (0..n)
                    .map(|k| 2.0 / (h * h) * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos()))
                    .collect()
            })
            .collect();
        let normalization = domain.cells().iter().map(|&n| 2.0 / n as f64).product();
        let scratch_len = plans.iter().map(|p| p.get_scratch_len()).max().unwrap_or(0);
        Self { domain, plans, symbols, normalization, scratch_len }
    }

    pub fn domain(&self) -> &Arc<BoxDomain> {
        &self.domain
    }

    pub fn solve(&self, a: f64, rhs: &ScalarField) -> Result<ScalarField> {
        check_coefficient(a)?;
        if rhs.domain() != &self.domain {
            return Err(Error::InvalidArgument("right-hand side lives on a different domain".into()));
        }
        let mut values = rhs.values().to_vec();
        self.solve_in_place(a, &mut values);
        ScalarField::new(self.domain.clone(), values)
    }

    /// Overwrites `values` (the right-hand side) with the solution.
    pub fn solve_in_place(&self, a: f64, values: &mut [f64]) {
        debug_assert_eq!(values.len(), self.domain.len());
        let mut line = vec![0.0; self.domain.cells().iter().copied().max().unwrap_or(0)];
        let mut scratch = vec![0.0; self.scratch_len];
        for axis in 0..self.domain.dim() {
            self.transform_axis(values, axis, true, &mut line, &mut scratch);
        }
        let dim = self.domain.dim();
        let cells = self.domain.cells();
        let strides = self.domain.strides();
        for (idx, v) in values.iter_mut().enumerate() {
            let mut symbol = 0.0;
            for k in 0..dim {
                symbol += self.symbols[k][(idx / strides[k]) % cells[k]];
            }
            *v *= self.normalization / (1.0 + a * symbol);
        }
        for axis in 0..dim {
            self.transform_axis(values, axis, false, &mut line, &mut scratch);
        }
    }

    fn transform_axis(&self, data: &mut [f64], axis: usize, forward: bool, line: &mut [f64], scratch: &mut [f64]) {
        let n = self.domain.cells()[axis];
        let stride = self.domain.strides()[axis];
        let plan = &self.plans[axis];
        let run = |buf: &mut [f64], scratch: &mut [f64]| {
            if forward {
                plan.process_dct2_with_scratch(buf, scratch);
            } else {
                plan.process_dct3_with_scratch(buf, scratch);
            }
        };
        let block = n * stride;
        let line = &mut line[..n];
        for outer in (0..data.len()).step_by(block) {
            if stride == 1 {
                run(&mut data[outer..outer + n], scratch);
                continue;
            }
            for inner in 0..stride {
                let base = outer + inner;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + j * stride];
                }
                run(line, scratch);
                for (j, l) in line.iter().enumerate() {
                    data[base + j * stride] = *l;
                }
            }
        }
    }
}

/// Solves `(I - a Lap_h) x = rhs` by cosine-transform diagonalization.
pub fn helmholtz_solve(domain: &Arc<BoxDomain>, a: f64, rhs: &ScalarField) -> Result<ScalarField> {
    HelmholtzSolver::new(domain.clone()).solve(a, rhs)
}

/// Solves `(I - a Lap_h) x = rhs` by matrix-free conjugate gradient.
pub fn helmholtz_solve_cg(
    domain: &Arc<BoxDomain>,
    a: f64,
    rhs: &ScalarField,
    opts: CgOptions,
) -> Result<(ScalarField, CgStats)> {
    check_coefficient(a)?;
    let b = rhs.values();
    let n = b.len();
    let b_norm = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if b_norm == 0.0 {
        return Ok((ScalarField::zeros(domain.clone()), CgStats { iterations: 0, residual: 0.0 }));
    }
    let target = opts.rel_tol * b_norm;

    let mut x = b.to_vec();
    let mut ax = vec![0.0; n];
    apply_helmholtz_into(domain, a, &x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let inf_norm = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    let mut residual = inf_norm(&r);
    let mut iterations = 0;
    while residual > target {
        if iterations >= opts.max_iter {
            return Err(Error::SolverDivergence { iterations, residual });
        }
        apply_helmholtz_into(domain, a, &p, &mut ap);
        let alpha = rr / p.iter().zip(&ap).map(|(pi, api)| pi * api).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        residual = inf_norm(&r);
        iterations += 1;
        if !residual.is_finite() {
            return Err(Error::SolverDivergence { iterations, residual });
        }
    }
    Ok((ScalarField::new(domain.clone(), x)?, CgStats { iterations, residual }))
}

/// `||(I - a Lap_h) x - rhs||_inf`.
pub fn helmholtz_residual(a: f64, x: &ScalarField, rhs: &ScalarField) -> f64 {
    let mut ax = vec![0.0; x.values().len()];
    apply_helmholtz_into(x.domain(), a, x.values(), &mut ax);
    ax.iter().zip(rhs.values()).fold(0.0, |m, (l, r)| m.max((l - r).abs()))
}
