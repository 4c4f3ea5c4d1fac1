//! Executable checks of the structural hypotheses on the nonlinearity:
//! quasi-positivity, mass dissipation/conservation and quadratic growth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Polynomial, PolynomialVectorField};

/// Values below `-VIOLATION_TOL` (or above, for mass balance) count as violations.
pub const VIOLATION_TOL: f64 = 1e-12;
/// Range of the per-coordinate log-uniform sampling distribution.
pub const SAMPLE_LO: f64 = 1e-6;
pub const SAMPLE_HI: f64 = 1e3;

const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    Symbolic,
    Structural,
    Sampled,
}

/// A point where a checked condition fails, with the offending value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub value: f64,
    /// 0-based component for per-component conditions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerReport {
    pub verdict: Verdict,
    pub method: CheckMethod,
    pub witnesses: Vec<Witness>,
    /// Number of points evaluated (0 for symbolic/structural verdicts).
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassBalance {
    Conservative,
    Dissipative,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBalanceReport {
    pub outcome: MassBalance,
    #[serde(flatten)]
    pub report: CheckerReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub degree: u32,
    pub satisfies_growth_bound: bool,
    /// Maximum absolute coefficient sum over components.
    pub growth_constant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    let (lo, hi) = (SAMPLE_LO.ln(), SAMPLE_HI.ln());
    rng.gen_range(lo..hi).exp()
}

/// Deterministic probe points in the orthant: the origin, then each
/// coordinate axis at 1 and at `SAMPLE_HI`.
fn special_points(m: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; m]];
    for scale in [1.0, SAMPLE_HI] {
        for j in 0..m {
            let mut p = vec![0.0; m];
            p[j] = scale;
            pts.push(p);
        }
    }
    pts
}

/// Quasi-positivity: `f_i(u) >= 0` on the face `{u >= 0, u_i = 0}`.
///
/// A component passes structurally when each negative term contains
/// `u_i`. Components failing that test are sampled on their face.
pub fn check_quasi_positivity(field: &PolynomialVectorField, sample_count: usize, seed: u64) -> CheckerReport {
    let m = field.m();
    let failing: Vec<usize> = (0..m)
        .filter(|&i| field.component(i).terms().iter().any(|t| t.coefficient < 0.0 && t.exponents[i] == 0))
        .collect();
    if failing.is_empty() {
        return CheckerReport {
            verdict: Verdict::Certified,
            method: CheckMethod::Structural,
            witnesses: Vec::new(),
            samples: 0,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witnesses = Vec::new();
    let mut samples = 0;
    for &i in &failing {
        let p = field.component(i);
        let face_specials = special_points(m).into_iter().filter(|pt| pt[i] == 0.0);
        let random = (0..sample_count.max(1)).map(|_| {
            let mut pt: Vec<f64> = (0..m).map(|_| log_uniform(&mut rng)).collect();
            pt[i] = 0.0;
            pt
        });
        for pt in face_specials.chain(random) {
            samples += 1;
            let v = p.eval(&pt);
            if v < -VIOLATION_TOL && witnesses.len() < MAX_WITNESSES {
                witnesses.push(Witness { point: pt, value: v, component: Some(i) });
            }
        }
    }
    let verdict = if witnesses.is_empty() { Verdict::Inconclusive } else { Verdict::Refuted };
    CheckerReport { verdict, method: CheckMethod::Sampled, witnesses, samples }
}

/// Mass balance of `S(u) = sum_i alpha_i f_i(u)` on the nonnegative orthant.
///
/// `S == 0` symbolically gives a certified conservative verdict. Otherwise
/// `S` is sampled: a positive value refutes dissipation, and a clean sample
/// yields a dissipative outcome whose verdict stays inconclusive because it
/// rests on sampling only.
pub fn check_mass_balance(
    field: &PolynomialVectorField,
    weights: Option<&[f64]>,
    sample_count: usize,
    seed: u64,
) -> MassBalanceReport {
    let m = field.m();
    let ones = vec![1.0; m];
    let weights = weights.unwrap_or(&ones);
    let sum = field.weighted_sum(weights).expect("weights validated against field size");
    if sum.is_zero() {
        return MassBalanceReport {
            outcome: MassBalance::Conservative,
            report: CheckerReport {
                verdict: Verdict::Certified,
                method: CheckMethod::Symbolic,
                witnesses: Vec::new(),
                samples: 0,
            },
        };
    }

    let witnesses = sample_positive(&sum, sample_count, seed);
    let samples = special_points(m).len() + sample_count;
    if witnesses.is_empty() {
        MassBalanceReport {
            outcome: MassBalance::Dissipative,
            report: CheckerReport { verdict: Verdict::Inconclusive, method: CheckMethod::Sampled, witnesses, samples },
        }
    } else {
        MassBalanceReport {
            outcome: MassBalance::Violated,
            report: CheckerReport { verdict: Verdict::Refuted, method: CheckMethod::Sampled, witnesses, samples },
        }
    }
}

fn sample_positive(sum: &Polynomial, sample_count: usize, seed: u64) -> Vec<Witness> {
    let m = sum.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = (0..sample_count).map(|_| (0..m).map(|_| log_uniform(&mut rng)).collect::<Vec<_>>());
    let mut witnesses = Vec::new();
    for pt in special_points(m).into_iter().chain(random) {
        let v = sum.eval(&pt);
        if v > VIOLATION_TOL && witnesses.len() < MAX_WITNESSES {
            witnesses.push(Witness { point: pt, value: v, component: None });
        }
    }
    witnesses
}

/// Polynomial degree as a decidable proxy for slightly super-quadratic
/// growth: degree <= 2 satisfies the bound for every epsilon > 0, degree
/// >= 3 fails it for all small epsilon.
pub fn growth_degree(field: &PolynomialVectorField) -> GrowthReport {
    let degree = field.degree();
    let satisfies = degree <= 2;
    GrowthReport {
        degree,
        satisfies_growth_bound: satisfies,
        growth_constant: field.growth_constant(),
        warning: (!satisfies).then(|| {
            format!("nonlinearity has degree {degree} > 2; uniform-in-time bounds are not guaranteed")
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{lotka_volterra, reversible, Term};

    fn skew() -> Vec<Vec<f64>> {
        vec![vec![0.0, 1.0], vec![-1.0, 0.0]]
    }

    #[test]
    fn quasi_positivity_structural_for_builtins() {
        let r = reversible(1.0, 2.0, [1.0; 4]).unwrap();
        let rep = check_quasi_positivity(r.field(), 100, 0);
        assert_eq!((rep.verdict, rep.method), (Verdict::Certified, CheckMethod::Structural));

        for tau in [[0.0, 0.0], [0.3, 2.0]] {
            let lv = lotka_volterra(&tau, &[vec![-1.0, 4.0], vec![-5.0, 0.0]], &[1.0, 1.0]).unwrap();
            let rep = check_quasi_positivity(lv.field(), 100, 0);
            assert_eq!(rep.verdict, Verdict::Certified);
        }
    }

    #[test]
    fn quasi_positivity_refutes_cross_loss() {
        let f = PolynomialVectorField::from_terms(2, [(0, Term::new(-1.0, vec![0, 1]))]).unwrap();
        let rep = check_quasi_positivity(&f, 100, 3);
        assert_eq!(rep.verdict, Verdict::Refuted);
        let w = &rep.witnesses[0];
        assert_eq!(w.point, vec![0.0, 1.0]);
        assert_eq!(w.value, -1.0);
        assert_eq!(w.component, Some(0));
        for w in &rep.witnesses {
            assert_eq!(w.point[0], 0.0);
            assert_eq!(f.component(0).eval(&w.point), w.value);
        }
    }

    #[test]
    fn quasi_positivity_inconclusive_when_sampling_is_clean() {
        // f_1 = u_2^2 - u_2 + 1/4 = (u_2 - 1/2)^2 is nonnegative on the face u_1 = 0,
        // but its negative term carries no u_1 factor.
        let h = PolynomialVectorField::from_terms(
            2,
            [(0, Term::new(1.0, vec![0, 2])), (0, Term::new(-1.0, vec![0, 1])), (0, Term::new(0.25, vec![0, 0]))],
        )
        .unwrap();
        let rep = check_quasi_positivity(&h, 1000, 0);
        assert_eq!((rep.verdict, rep.method), (Verdict::Inconclusive, CheckMethod::Sampled));
        assert!(rep.samples > 1000);
    }

    #[test]
    fn mass_balance_classification() {
        let r = reversible(1.0, 1.0, [1.0; 4]).unwrap();
        let rep = check_mass_balance(r.field(), None, 100, 0);
        assert_eq!(rep.outcome, MassBalance::Conservative);
        assert_eq!(rep.report.method, CheckMethod::Symbolic);

        let lv = lotka_volterra(&[1.0, 1.0], &skew(), &[1.0, 1.0]).unwrap();
        let rep = check_mass_balance(lv.field(), None, 1000, 0);
        assert_eq!(rep.outcome, MassBalance::Dissipative);
        assert_eq!((rep.report.verdict, rep.report.method), (Verdict::Inconclusive, CheckMethod::Sampled));
        assert!(rep.report.witnesses.is_empty());

        let f = PolynomialVectorField::from_terms(2, [(0, Term::new(1.0, vec![0, 1])), (1, Term::new(1.0, vec![0, 1]))])
            .unwrap();
        let rep = check_mass_balance(&f, None, 100, 0);
        assert_eq!(rep.outcome, MassBalance::Violated);
        assert_eq!(rep.report.witnesses[0].point, vec![0.0, 1.0]);
        assert_eq!(rep.report.witnesses[0].value, 2.0);
    }

    #[test]
    fn weighted_mass_balance() {
        let f = PolynomialVectorField::from_terms(2, [(0, Term::new(-2.0, vec![1, 0])), (1, Term::new(1.0, vec![1, 0]))])
            .unwrap();
        assert_eq!(check_mass_balance(&f, Some(&[1.0, 2.0]), 10, 0).outcome, MassBalance::Conservative);
        assert_eq!(check_mass_balance(&f, Some(&[1.0, 3.0]), 10, 0).outcome, MassBalance::Violated);
        assert_eq!(check_mass_balance(&f, Some(&[1.0, 1.0]), 10, 0).outcome, MassBalance::Dissipative);
    }

    #[test]
    fn growth_degree_proxy() {
        let r = reversible(1.0, 1.0, [1.0; 4]).unwrap();
        assert_eq!(growth_degree(r.field()).degree, 2);
        assert!(growth_degree(r.field()).satisfies_growth_bound);
        let lv = lotka_volterra(&[1.0, 1.0], &skew(), &[1.0, 1.0]).unwrap();
        assert_eq!((growth_degree(lv.field()).degree, growth_degree(lv.field()).satisfies_growth_bound), (2, true));
        let cubic = PolynomialVectorField::from_terms(1, [(0, Term::new(1.0, vec![3]))]).unwrap();
        let g = growth_degree(&cubic);
        assert_eq!((g.degree, g.satisfies_growth_bound), (3, false));
        assert!(g.warning.is_some());
    }
}
