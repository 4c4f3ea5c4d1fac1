//! Sparse multivariate polynomials and polynomial vector fields.
//!
//! A [`Polynomial`] is kept in canonical form: terms sorted by exponent
//! vector, duplicates merged, zero coefficients removed. Evaluation always
//! sums in that order, so repeated evaluation is bit-identical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One monomial `coefficient * prod_j u_j^exponents[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn new(coefficient: f64, exponents: Vec<u32>) -> Self {
        Self { coefficient, exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn eval(&self, u: &[f64]) -> f64 {
        let mut acc = self.coefficient;
        for (&x, &e) in u.iter().zip(&self.exponents) {
            if e != 0 {
                acc *= x.powi(e as i32);
            }
        }
        acc
    }
}

/// A polynomial in `m` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    m: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    /// Builds a canonical polynomial, merging terms with equal exponents.
    pub fn new(m: usize, terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("polynomial needs at least one variable".into()));
        }
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for term in terms {
            if term.exponents.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "exponent vector {:?} has length {}, expected {m}",
                    term.exponents,
                    term.exponents.len()
                )));
            }
            if !term.coefficient.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient {} for exponents {:?}",
                    term.coefficient, term.exponents
                )));
            }
            *merged.entry(term.exponents).or_insert(0.0) += term.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(exponents, coefficient)| Term { coefficient, exponents })
            .collect();
        Ok(Self { m, terms })
    }

    pub fn zero(m: usize) -> Self {
        Self { m, terms: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.m);
        self.terms.iter().map(|t| t.eval(u)).fold(0.0, |acc, v| acc + v)
    }

    /// Maximum total degree over all terms (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    pub fn abs_coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let terms = self.terms.iter().filter(|t| t.exponents[var] > 0).map(|t| {
            let mut exponents = t.exponents.clone();
            let e = exponents[var];
            exponents[var] = e - 1;
            Term { coefficient: t.coefficient * f64::from(e), exponents }
        });
        Polynomial::new(self.m, terms).expect("derivative of a valid polynomial is valid")
    }

    /// `sum_k scales[k] * polys[k]`, merged symbolically.
    pub fn linear_combination<'a>(
        m: usize,
        parts: impl IntoIterator<Item = (f64, &'a Polynomial)>,
    ) -> Result<Polynomial> {
        let mut terms = Vec::new();
        for (scale, p) in parts {
            if p.m != m {
                return Err(Error::InvalidArgument(format!(
                    "cannot combine polynomials in {} and {m} variables",
                    p.m
                )));
            }
            terms.extend(
                p.terms
                    .iter()
                    .map(|t| Term { coefficient: scale * t.coefficient, exponents: t.exponents.clone() }),
            );
        }
        Polynomial::new(m, terms)
    }

    /// Same polynomial viewed in `m_new >= m` variables (new variables absent).
    pub fn widen(&self, m_new: usize) -> Polynomial {
        assert!(m_new >= self.m);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut exponents = t.exponents.clone();
                exponents.resize(m_new, 0);
                Term { coefficient: t.coefficient, exponents }
            })
            .collect();
        Polynomial { m: m_new, terms }
    }
}

/// The reaction nonlinearity `f = (f_1, ..., f_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialVectorField {
    components: Vec<Polynomial>,
}

impl PolynomialVectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let m = components.len();
        if m == 0 {
            return Err(Error::InvalidArgument("vector field needs at least one component".into()));
        }
        if let Some((i, p)) = components.iter().enumerate().find(|(_, p)| p.nvars() != m) {
            return Err(Error::InvalidArgument(format!(
                "component {} has {} variables, expected {m}",
                i + 1,
                p.nvars()
            )));
        }
        Ok(Self { components })
    }

    /// Builds a field from `(species, term)` pairs, species 0-based.
    pub fn from_terms(m: usize, terms: impl IntoIterator<Item = (usize, Term)>) -> Result<Self> {
        let mut per_species: Vec<Vec<Term>> = vec![Vec::new(); m];
        for (species, term) in terms {
            let slot = per_species.get_mut(species).ok_or_else(|| {
                Error::InvalidArgument(format!("species index {} out of range 1..={m}", species + 1))
            })?;
            slot.push(term);
        }
        let components = per_species
            .into_iter()
            .map(|terms| Polynomial::new(m, terms))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.m()];
        self.eval_into(u, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        check_input(u, self.m())?;
        for (i, (p, slot)) in self.components.iter().zip(out.iter_mut()).enumerate() {
            let v = p.eval(u);
            if !v.is_finite() {
                return Err(Error::EvaluationOverflow { component: i + 1 });
            }
            *slot = v;
        }
        Ok(())
    }

    /// Exact Jacobian `J[i][j] = d f_i / d u_j`.
    pub fn jacobian(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_input(u, self.m())?;
        let m = self.m();
        let mut jac = vec![vec![0.0; m]; m];
        for (i, p) in self.components.iter().enumerate() {
            for (j, slot) in jac[i].iter_mut().enumerate() {
                let v = p.derivative(j).eval(u);
                if !v.is_finite() {
                    return Err(Error::EvaluationOverflow { component: i + 1 });
                }
                *slot = v;
            }
        }
        Ok(jac)
    }

    /// `S(u) = sum_i weights[i] * f_i(u)` as a merged polynomial.
    pub fn weighted_sum(&self, weights: &[f64]) -> Result<Polynomial> {
        if weights.len() != self.m() {
            return Err(Error::InvalidArgument(format!(
                "{} weights given for {} species",
                weights.len(),
                self.m()
            )));
        }
        Polynomial::linear_combination(self.m(), weights.iter().copied().zip(&self.components))
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// Growth constant: maximum absolute coefficient sum over components.
    pub fn growth_constant(&self) -> f64 {
        self.components.iter().map(Polynomial::abs_coefficient_sum).fold(0.0, f64::max)
    }

    /// Flattened form for per-cell evaluation in the time stepper.
    pub fn compile(&self) -> CompiledField {
        let mut comp_offsets = vec![0];
        let mut coefficients = Vec::new();
        let mut term_offsets = vec![0];
        let mut factors = Vec::new();
        for p in &self.components {
            for t in p.terms() {
                coefficients.push(t.coefficient);
                for (var, &e) in t.exponents.iter().enumerate() {
                    if e != 0 {
                        factors.push((var as u32, e as i32));
                    }
                }
                term_offsets.push(factors.len());
            }
            comp_offsets.push(coefficients.len());
        }
        CompiledField { m: self.m(), comp_offsets, coefficients, term_offsets, factors }
    }
}

fn check_input(u: &[f64], m: usize) -> Result<()> {
    if u.len() != m {
        return Err(Error::InvalidArgument(format!("point has {} coordinates, expected {m}", u.len())));
    }
    if let Some(x) = u.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite coordinate {x}")));
    }
    Ok(())
}

/// Allocation-free evaluator with the same summation order as
/// [`PolynomialVectorField::eval`].
#[derive(Debug, Clone)]
pub struct CompiledField {
    m: usize,
    comp_offsets: Vec<usize>,
    coefficients: Vec<f64>,
    term_offsets: Vec<usize>,
    factors: Vec<(u32, i32)>,
}

impl CompiledField {
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn eval_into(&self, u: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate().take(self.m) {
            let mut sum = 0.0;
            for t in self.comp_offsets[i]..self.comp_offsets[i + 1] {
                let mut acc = self.coefficients[t];
                for &(var, e) in &self.factors[self.term_offsets[t]..self.term_offsets[t + 1]] {
                    acc *= u[var as usize].powi(e);
                }
                sum += acc;
            }
            *slot = sum;
        }
    }
}
