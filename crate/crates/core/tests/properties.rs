use std::sync::Arc;

use proptest::prelude::*;
use rdmass::grid::snapshot::{decode_snapshot, encode_snapshot};
use rdmass::grid::{helmholtz_residual, helmholtz_solve, lp_norm, neumann_laplacian_apply, BoxDomain, ScalarField, State};
use rdmass::integrate::{step_imex, IntegratorConfig, Scheme};
use rdmass::monitor::Monitor;
use rdmass::systems::{
    augment, check_mass_balance, check_quasi_positivity, lotka_volterra, reversible, CheckMethod, MassBalance,
    Polynomial, PolynomialVectorField, Term,
};

fn small_domain() -> impl Strategy<Value = BoxDomain> {
    (1usize..=3)
        .prop_flat_map(|n| (prop::collection::vec(0.5f64..2.0, n), prop::collection::vec(2usize..=5, n)))
        .prop_map(|(l, c)| BoxDomain::new(l, c).unwrap())
}

fn domain_and_field() -> impl Strategy<Value = (Arc<BoxDomain>, Vec<f64>)> {
    small_domain().prop_flat_map(|d| {
        let len = d.len();
        (Just(Arc::new(d)), prop::collection::vec(-10.0f64..10.0, len))
    })
}

/// Neumann Laplacian as a dense matrix, one row per cell from its neighbours.
fn dense_laplacian(d: &BoxDomain) -> Vec<Vec<f64>> {
    let len = d.len();
    let mut mat = vec![vec![0.0; len]; len];
    for idx in 0..len {
        let cell = d.unravel(idx);
        for axis in 0..d.dim() {
            let inv_h2 = 1.0 / d.spacing()[axis].powi(2);
            for step in [-1i64, 1] {
                let j = cell[axis] as i64 + step;
                if (0..d.cells()[axis] as i64).contains(&j) {
                    let nb = (idx as i64 + step * d.strides()[axis] as i64) as usize;
                    mat[idx][nb] += inv_h2;
                    mat[idx][idx] -= inv_h2;
                }
            }
        }
    }
    mat
}

fn polynomial_field(m: usize) -> impl Strategy<Value = PolynomialVectorField> {
    let term = (0..m, -3.0f64..3.0, prop::collection::vec(0u32..=2, m));
    prop::collection::vec(term, 1..8).prop_map(move |terms| {
        PolynomialVectorField::from_terms(m, terms.into_iter().map(|(s, c, e)| (s, Term::new(c, e)))).unwrap()
    })
}

fn dissipative_lv() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (2usize..=4).prop_flat_map(|m| {
        (
            prop::collection::vec(0.0f64..2.0, m),
            prop::collection::vec(-2.0f64..2.0, m * m),
            prop::collection::vec(0.0f64..1.0, m * m),
        )
            .prop_map(move |(tau, s, n)| {
                let a = (0..m)
                    .map(|i| (0..m).map(|j| s[i * m + j] - s[j * m + i] - n[i * m + j]).collect())
                    .collect();
                (tau, a)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_matches_dense_matrix((d, u) in domain_and_field()) {
        let lu = neumann_laplacian_apply(&ScalarField::new(d.clone(), u.clone()).unwrap());
        let mat = dense_laplacian(&d);
        for (row, got) in mat.iter().zip(lu.values()) {
            let want: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum();
            prop_assert!((want - got).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn laplacian_is_symmetric_and_sums_to_zero((d, u) in domain_and_field(), seed in any::<u64>()) {
        let v: Vec<f64> = (0..d.len()).map(|k| ((k as u64).wrapping_mul(seed | 1) % 97) as f64 - 48.0).collect();
        let fu = ScalarField::new(d.clone(), u.clone()).unwrap();
        let fv = ScalarField::new(d.clone(), v.clone()).unwrap();
        let lu = neumann_laplacian_apply(&fu);
        let lv = neumann_laplacian_apply(&fv);
        let a: f64 = lu.values().iter().zip(&v).map(|(x, y)| x * y).sum();
        let b: f64 = lv.values().iter().zip(&u).map(|(x, y)| x * y).sum();
        let scale: f64 = lu.values().iter().map(|x| x.abs()).sum::<f64>() * 50.0 + 1.0;
        prop_assert!((a - b).abs() <= 1e-10 * scale);
        let total: f64 = lu.values().iter().sum();
        prop_assert!(total.abs() <= 1e-10 * scale);
    }

    #[test]
    fn helmholtz_preserves_sign_and_solves((d, u) in domain_and_field(), a in 1e-3f64..10.0) {
        let rhs = ScalarField::new(d.clone(), u.iter().map(|v| v.abs()).collect()).unwrap();
        let x = helmholtz_solve(&d, a, &rhs).unwrap();
        prop_assert!(x.min_value() >= -1e-12 * rhs.sup_norm());
        prop_assert!(helmholtz_residual(a, &x, &rhs) <= 1e-11 * (1.0 + rhs.sup_norm()));
    }

    #[test]
    fn jacobian_matches_finite_differences(
        f in (1usize..=3).prop_flat_map(polynomial_field),
        seed in prop::collection::vec(0.1f64..2.0, 3),
    ) {
        let m = f.m();
        let u = &seed[..m];
        let jac = f.jacobian(u).unwrap();
        let h = 1e-6;
        for j in 0..m {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[j] += h;
            dn[j] -= h;
            let fp = f.eval(&up).unwrap();
            let fm = f.eval(&dn).unwrap();
            for i in 0..m {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                prop_assert!((fd - jac[i][j]).abs() <= 1e-5 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn compiled_eval_is_bit_identical(
        f in (1usize..=4).prop_flat_map(polynomial_field),
        u in prop::collection::vec(0.0f64..100.0, 4),
    ) {
        let m = f.m();
        let direct = f.eval(&u[..m]).unwrap();
        let again = f.eval(&u[..m]).unwrap();
        let mut compiled = vec![0.0; m];
        f.compile().eval_into(&u[..m], &mut compiled);
        prop_assert_eq!(direct.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), again.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(direct.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), compiled.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn skew_interaction_is_mass_neutral(
        s in prop::collection::vec(-2.0f64..2.0, 9),
        u in prop::collection::vec(0.0f64..50.0, 3),
    ) {
        let a: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| s[i * 3 + j] - s[j * 3 + i]).collect()).collect();
        let sys = lotka_volterra(&[0.0; 3], &a, &[1.0; 3]).unwrap();
        let total: f64 = sys.field().eval(&u).unwrap().iter().sum();
        let scale: f64 = u.iter().map(|x| x * x).sum::<f64>() * 4.0 + 1.0;
        prop_assert!(total.abs() <= 1e-13 * scale);
        prop_assert_eq!(check_mass_balance(sys.field(), None, 16, 0).outcome, MassBalance::Conservative);
    }

    #[test]
    fn lp_norms_increase_with_p_on_unit_volume(
        n in 1usize..=3,
        cells in 2usize..=6,
        values in prop::collection::vec(-5.0f64..5.0, 216),
    ) {
        let d = Arc::new(BoxDomain::cube(n, 1.0, cells).unwrap());
        let f = ScalarField::new(d.clone(), values[..d.len()].to_vec()).unwrap();
        let ps = [1.0, 1.5, 2.0, 3.0, 8.0, f64::INFINITY];
        let norms: Vec<f64> = ps.iter().map(|p| lp_norm(&f, *p).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[0] <= w[1] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn witnesses_reevaluate(f in (1usize..=3).prop_flat_map(polynomial_field), seed in any::<u64>()) {
        let qp = check_quasi_positivity(&f, 200, seed);
        for w in &qp.witnesses {
            let i = w.component.unwrap();
            prop_assert_eq!(w.point[i], 0.0);
            prop_assert!(w.point.iter().all(|v| *v >= 0.0));
            let value = f.component(i).eval(&w.point);
            prop_assert_eq!(value.to_bits(), w.value.to_bits());
            prop_assert!(value < -1e-12);
        }
        let mb = check_mass_balance(&f, None, 200, seed);
        let sum = f.weighted_sum(&vec![1.0; f.m()]).unwrap();
        for w in &mb.report.witnesses {
            prop_assert!(sum.eval(&w.point) > 1e-12);
        }
        prop_assert_eq!(mb.outcome == MassBalance::Violated, !mb.report.witnesses.is_empty());
    }

    #[test]
    fn augmentation_is_conservative((tau, a) in dissipative_lv()) {
        let m = tau.len();
        let sys = lotka_volterra(&tau, &a, &vec![1.0; m]).unwrap();
        let aug = augment(&sys).unwrap();
        let report = check_mass_balance(aug.field(), aug.weights(), 100, 1);
        prop_assert_eq!(report.outcome, MassBalance::Conservative);
        prop_assert_eq!(report.report.method, CheckMethod::Symbolic);
        prop_assert_eq!(aug.m(), m + 1);
    }

    #[test]
    fn snapshot_roundtrip_is_bit_exact((d, u) in domain_and_field()) {
        let f = ScalarField::new(d.clone(), u).unwrap();
        let back = decode_snapshot(&encode_snapshot(&f)).unwrap();
        prop_assert_eq!(back.cells, d.cells().to_vec());
        prop_assert_eq!(
            back.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn imex_step_keeps_sign_and_mass(
        (d, u) in domain_and_field(),
        dt in 1e-4f64..1e-2,
        k in 0.1f64..3.0,
    ) {
        let sys = reversible(k, 1.0, [1.0, 0.3, 0.7, 0.05]).unwrap();
        let len = d.len();
        let fields = (0..4)
            .map(|i| {
                let vals = (0..len).map(|c| (u[(c + i) % len].abs() * 0.2) + 0.01 * i as f64).collect();
                ScalarField::new(d.clone(), vals).unwrap()
            })
            .collect();
        let state = State::new(fields, 0.0).unwrap();
        let cfg = IntegratorConfig::new(Scheme::ImexEuler, dt, 1.0);
        let out = step_imex(&sys, &state, &cfg).unwrap();
        prop_assert!(out.state.min_value() >= 0.0);
        let mass = |s: &State| s.fields.iter().map(|f| f.sum()).sum::<f64>();
        let (m0, m1) = (mass(&state), mass(&out.state));
        prop_assert!((m1 - m0).abs() <= 1e-12 * m0.max(1.0) + out.clamped_mass / d.cell_volume());
    }

    #[test]
    fn window_aggregates_follow_species_relabeling(
        values in prop::collection::vec(0.0f64..3.0, 3 * 8 * 5),
        perm in Just([2usize, 0, 1]),
    ) {
        let d = Arc::new(BoxDomain::cube(1, 1.0, 8).unwrap());
        let mut a = Monitor::new(None, 1.0).unwrap();
        let mut b = Monitor::new(None, 1.0).unwrap();
        for r in 0..5 {
            let t = r as f64 * 0.25;
            let species: Vec<ScalarField> = (0..3)
                .map(|i| ScalarField::new(d.clone(), values[(r * 3 + i) * 8..(r * 3 + i + 1) * 8].to_vec()).unwrap())
                .collect();
            let permuted: Vec<ScalarField> = perm.iter().map(|&i| species[i].clone()).collect();
            a.push(&State::new(species, t).unwrap(), 0.0).unwrap();
            b.push(&State::new(permuted, t).unwrap(), 0.0).unwrap();
        }
        let (wa, wb) = (&a.windows()[0], &b.windows()[0]);
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(wa.window_l2[i].to_bits(), wb.window_l2[k].to_bits());
            prop_assert_eq!(wa.time_integral_sup[i].to_bits(), wb.time_integral_sup[k].to_bits());
        }
    }
}

#[test]
fn mixed_polynomial_term_order_is_canonical() {
    let p = Polynomial::new(2, [Term::new(1.0, vec![0, 1]), Term::new(2.0, vec![1, 0]), Term::new(-1.0, vec![0, 1])])
        .unwrap();
    assert_eq!(p.terms().len(), 1);
    assert_eq!(p.eval(&[3.0, 5.0]), 6.0);
}
