//! Named example systems.

use super::{BalanceClass, PolynomialVectorField, SystemSpec, Term};
use crate::error::{Error, Result};

/// Reversible binary reaction `S_1 + S_2 <-> S_3 + S_4` with mass-action
/// rates `k_f` (forward) and `k_b` (backward).
pub fn reversible(k_f: f64, k_b: f64, d: [f64; 4]) -> Result<SystemSpec> {
    for (name, k) in [("k_f", k_f), ("k_b", k_b)] {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument(format!("rate {name} = {k} must be positive")));
        }
    }
    let forward = [1, 1, 0, 0];
    let backward = [0, 0, 1, 1];
    let mut terms = Vec::with_capacity(8);
    for species in 0..4 {
        let sign = if species < 2 { -1.0 } else { 1.0 };
        terms.push((species, Term::new(sign * k_f, forward.to_vec())));
        terms.push((species, Term::new(-sign * k_b, backward.to_vec())));
    }
    let field = PolynomialVectorField::from_terms(4, terms)?;
    SystemSpec::new(d.to_vec(), field, BalanceClass::Conservative, None)
}

/// Lotka-Volterra system `f_i = -tau_i u_i + u_i sum_j a_ij u_j`.
///
/// Requires `tau_i >= 0` and `A + A^T <= 0` entrywise.
pub fn lotka_volterra(tau: &[f64], a: &[Vec<f64>], d: &[f64]) -> Result<SystemSpec> {
    let m = tau.len();
    if m == 0 {
        return Err(Error::InvalidArgument("Lotka-Volterra system needs at least one species".into()));
    }
    if a.len() != m || a.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidArgument(format!("interaction matrix must be {m}x{m}")));
    }
    if let Some((i, t)) = tau.iter().enumerate().find(|(_, t)| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidArgument(format!("tau_{} = {t} must be nonnegative", i + 1)));
    }
    let mut antisymmetric = true;
    for i in 0..m {
        for j in 0..m {
            let s = a[i][j] + a[j][i];
            if !s.is_finite() || s > 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "(A + A^T)[{}][{}] = {s} is positive; need A + A^T <= 0",
                    i + 1,
                    j + 1
                )));
            }
            antisymmetric &= s == 0.0;
        }
    }

    let mut terms = Vec::new();
    for i in 0..m {
        let mut e = vec![0; m];
        e[i] = 1;
        terms.push((i, Term::new(-tau[i], e)));
        for j in 0..m {
            let mut e = vec![0; m];
            e[i] += 1;
            e[j] += 1;
            terms.push((i, Term::new(a[i][j], e)));
        }
    }
    let field = PolynomialVectorField::from_terms(m, terms)?;
    let class = if antisymmetric && tau.iter().all(|&t| t == 0.0) {
        BalanceClass::Conservative
    } else {
        BalanceClass::Dissipative
    };
    SystemSpec::new(d.to_vec(), field, class, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skew() -> Vec<Vec<f64>> {
        vec![vec![0.0, 1.0], vec![-1.0, 0.0]]
    }

    #[test]
    fn reversible_values() {
        let sys = reversible(1.0, 1.0, [1.0; 4]).unwrap();
        assert_eq!(sys.field().eval(&[1.0; 4]).unwrap(), vec![0.0; 4]);
        assert_eq!(sys.field().eval(&[2.0, 1.0, 1.0, 1.0]).unwrap(), vec![-1.0, -1.0, 1.0, 1.0]);
        assert_eq!(sys.field().eval(&[0.0; 4]).unwrap(), vec![0.0; 4]);
        assert_eq!(sys.balance_class(), BalanceClass::Conservative);
    }

    #[test]
    fn reversible_rejects_bad_rates() {
        assert!(reversible(0.0, 1.0, [1.0; 4]).is_err());
        assert!(reversible(1.0, -2.0, [1.0; 4]).is_err());
    }

    #[test]
    fn lotka_volterra_values_and_class() {
        let sys = lotka_volterra(&[0.0, 0.0], &skew(), &[1.0, 1.0]).unwrap();
        assert_eq!(sys.field().eval(&[1.0, 2.0]).unwrap(), vec![2.0, -2.0]);
        assert_eq!(sys.balance_class(), BalanceClass::Conservative);

        let sys = lotka_volterra(&[1.0, 2.0], &skew(), &[1.0, 1.0]).unwrap();
        assert_eq!(sys.balance_class(), BalanceClass::Dissipative);
    }

    #[test]
    fn lotka_volterra_rejects_bad_parameters() {
        let err = lotka_volterra(&[0.0, 0.0], &[vec![0.0, 1.0], vec![1.0, 0.0]], &[1.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("[1][2]"), "{err}");
        assert!(lotka_volterra(&[-0.1, 0.0], &skew(), &[1.0, 1.0]).is_err());
        assert!(lotka_volterra(&[0.0, 0.0], &[vec![0.0, 1.0]], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn lotka_volterra_relaxed_condition_is_dissipative() {
        let a = vec![vec![-1.0, 2.0], vec![-3.0, 0.0]];
        let sys = lotka_volterra(&[0.0, 0.0], &a, &[1.0, 1.0]).unwrap();
        assert_eq!(sys.balance_class(), BalanceClass::Dissipative);
    }
}
