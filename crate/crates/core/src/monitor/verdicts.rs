use serde::{Deserialize, Serialize};

use super::{MetricRecord, WindowAggregate};
use crate::error::{Error, Result};
use crate::systems::{BalanceClass, SystemSpec};

/// Relative tolerance of the mass bound and the maximum principle.
pub const MASS_REL_TOL: f64 = 1e-8;
/// Relative per-record increase allowed by the monotonicity verdict.
pub const MONOTONE_REL_TOL: f64 = 1e-10;
/// Relative slack of the late-versus-early trend comparisons.
pub const TREND_REL_SLACK: f64 = 1e-6;
const MIN_WINDOWS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub status: Status,
    pub observed: Option<f64>,
    pub threshold: Option<f64>,
    pub note: String,
}

impl Assessment {
    fn compare(observed: f64, threshold: f64, note: impl Into<String>) -> Self {
        let status = if observed <= threshold { Status::Pass } else { Status::Fail };
        Self { status, observed: Some(observed), threshold: Some(threshold), note: note.into() }
    }

    fn without_values(status: Status, note: impl Into<String>) -> Self {
        Self { status, observed: None, threshold: None, note: note.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub mass_bound: Assessment,
    pub mass_monotone: Assessment,
    pub equal_diffusion_max_principle: Assessment,
    pub uniform_in_time: Assessment,
    pub window_l2_bounded: Assessment,
    pub time_integral_sup_bounded: Assessment,
    /// Reference value of the duality estimate for `n >= 3`; informational.
    pub duality_reference: Option<f64>,
}

impl Verdicts {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Assessment)> {
        [
            ("mass_bound", &self.mass_bound),
            ("mass_monotone", &self.mass_monotone),
            ("equal_diffusion_max_principle", &self.equal_diffusion_max_principle),
            ("uniform_in_time", &self.uniform_in_time),
            ("window_l2_bounded", &self.window_l2_bounded),
            ("time_integral_sup_bounded", &self.time_integral_sup_bounded),
        ]
        .into_iter()
    }

    pub fn any_failed(&self) -> bool {
        self.iter().any(|(_, a)| a.status == Status::Fail)
    }
}

/// Evaluates the monitored estimates over a finished run.
///
/// `windows` should hold the completed windows in order; incomplete ones are
/// ignored. `dim` is the spatial dimension.
pub fn issue_verdicts(
    system: &SystemSpec,
    dim: usize,
    records: &[MetricRecord],
    windows: &[WindowAggregate],
) -> Result<Verdicts> {
    let first = records.first().ok_or_else(|| Error::Precondition("no records to assess".into()))?;
    let weights = system.weights_or_ones();
    let alpha_max = weights.iter().copied().fold(0.0, f64::max);
    let m0 = first.total_weighted_mass;
    let clamp_slack = |r: &MetricRecord| alpha_max * (r.clamped_mass_cumulative - first.clamped_mass_cumulative);
    let mass_applicable = system.balance_class() != BalanceClass::Unknown;

    let mass_bound = if mass_applicable {
        let observed = records.iter().map(|r| r.total_weighted_mass - clamp_slack(r)).fold(f64::NEG_INFINITY, f64::max);
        Assessment::compare(observed, m0 * (1.0 + MASS_REL_TOL), "max weighted mass less clamped mass")
    } else {
        Assessment::without_values(Status::NotApplicable, "system has no certified mass balance")
    };

    let mass_monotone = if mass_applicable {
        let observed = records
            .windows(2)
            .map(|p| {
                let clamp = alpha_max * (p[1].clamped_mass_cumulative - p[0].clamped_mass_cumulative);
                p[1].total_weighted_mass - p[0].total_weighted_mass - clamp
            })
            .fold(0.0, f64::max);
        Assessment::compare(observed, MONOTONE_REL_TOL * m0.max(f64::MIN_POSITIVE), "largest increase between records")
    } else {
        Assessment::without_values(Status::NotApplicable, "system has no certified mass balance")
    };

    let equal_diffusion_max_principle = if !system.equal_diffusion() {
        Assessment::without_values(Status::NotApplicable, "diffusion coefficients differ")
    } else if !mass_applicable {
        Assessment::without_values(Status::NotApplicable, "system has no certified mass balance")
    } else {
        let observed = records.iter().map(|r| r.weighted_sum_linf).fold(0.0, f64::max);
        Assessment::compare(
            observed,
            first.weighted_sum_linf * (1.0 + MASS_REL_TOL),
            "sup of the weighted species sum against its initial value",
        )
    };

    let complete: Vec<&WindowAggregate> = windows.iter().filter(|w| w.complete).collect();
    let initial_sup = first.max_linf();
    let (uniform_in_time, window_l2_bounded, time_integral_sup_bounded) = if complete.len() < MIN_WINDOWS {
        let note = format!("{} complete windows, at least {MIN_WINDOWS} needed", complete.len());
        let a = Assessment::without_values(Status::Inconclusive, note);
        (a.clone(), a.clone(), a)
    } else {
        let half = complete.len() / 2;
        let (early, late) = complete.split_at(half);
        let scalar = |f: &dyn Fn(&WindowAggregate) -> f64, ws: &[&WindowAggregate]| {
            ws.iter().map(|w| f(w)).fold(0.0, f64::max)
        };
        let uniform = {
            let e = scalar(&|w| w.sup_linf, early);
            let l = scalar(&|w| w.sup_linf, late);
            Assessment::compare(
                l,
                e + TREND_REL_SLACK * initial_sup.max(e),
                format!("late-half sup against early-half sup over {} windows", complete.len()),
            )
        };
        let per_species = |pick: &dyn Fn(&WindowAggregate) -> &[f64], label: &str| {
            let mut worst: Option<(f64, f64, f64, usize)> = None;
            for i in 0..system.m() {
                let e = scalar(&|w| pick(w)[i], early);
                let l = scalar(&|w| pick(w)[i], late);
                let threshold = e + TREND_REL_SLACK * e.max(initial_sup);
                let excess = l - threshold;
                if worst.is_none_or(|(x, ..)| excess > x) {
                    worst = Some((excess, l, threshold, i));
                }
            }
            let (_, l, threshold, i) = worst.expect("at least one species");
            Assessment::compare(l, threshold, format!("{label}, species {}: late half against early half", i + 1))
        };
        (
            uniform,
            per_species(&|w| &w.window_l2, "window L2"),
            per_species(&|w| &w.time_integral_sup, "sup of time integral"),
        )
    };

    let duality_reference = (dim >= 3).then(|| {
        let n = dim as f64;
        let mass: f64 = first.l1.iter().sum();
        mass.powf((n - 2.0) / (n + 1.0))
            * (2.0_f64.sqrt() * system.d_max() / system.d_min()).powf((n - 2.0) / 3.0)
    });

    Ok(Verdicts {
        mass_bound,
        mass_monotone,
        equal_diffusion_max_principle,
        uniform_in_time,
        window_l2_bounded,
        time_integral_sup_bounded,
        duality_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{reversible, PolynomialVectorField, Term};

    fn rec(t: f64, mass: f64, sup: f64) -> MetricRecord {
        MetricRecord {
            t,
            l1: vec![mass / 4.0; 4],
            linf: vec![sup; 4],
            total_weighted_mass: mass,
            min_value: 0.0,
            clamped_mass_cumulative: 0.0,
            weighted_sum_linf: 4.0 * sup,
        }
    }

    fn window(tau: f64, v: f64) -> WindowAggregate {
        WindowAggregate {
            tau,
            width: 1.0,
            window_l2: vec![v; 4],
            time_integral_sup: vec![v; 4],
            sup_linf: v,
            complete: true,
        }
    }

    #[test]
    fn steady_run_passes() {
        let sys = reversible(1.0, 1.0, [1.0; 4]).unwrap();
        let records: Vec<_> = (0..=8).map(|k| rec(k as f64, 4.0, 1.0)).collect();
        let windows: Vec<_> = (0..8).map(|k| window(k as f64, 1.0)).collect();
        let v = issue_verdicts(&sys, 3, &records, &windows).unwrap();
        assert!(v.iter().all(|(_, a)| a.status == Status::Pass), "{v:#?}");
        let r = v.duality_reference.unwrap();
        assert!((r - 4.0_f64.powf(0.25) * 2.0_f64.sqrt().powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn mass_growth_fails() {
        let sys = reversible(1.0, 1.0, [1.0; 4]).unwrap();
        let records = vec![rec(0.0, 4.0, 1.0), rec(1.0, 4.0 + 1e-6, 1.0)];
        let v = issue_verdicts(&sys, 1, &records, &[]).unwrap();
        assert_eq!(v.mass_bound.status, Status::Fail);
        assert_eq!(v.mass_monotone.status, Status::Fail);
        assert_eq!(v.uniform_in_time.status, Status::Inconclusive);
        assert!(v.duality_reference.is_none());
    }

    #[test]
    fn late_growth_fails_trend() {
        let sys = reversible(1.0, 1.0, [1.0; 4]).unwrap();
        let records: Vec<_> = (0..=4).map(|k| rec(k as f64, 4.0, 1.0)).collect();
        let windows = vec![window(0.0, 1.0), window(1.0, 1.0), window(2.0, 1.0), window(3.0, 1.1)];
        let v = issue_verdicts(&sys, 1, &records, &windows).unwrap();
        assert_eq!(v.uniform_in_time.status, Status::Fail);
        assert_eq!(v.window_l2_bounded.status, Status::Fail);
    }

    #[test]
    fn unknown_balance_is_not_applicable() {
        let f = PolynomialVectorField::from_terms(1, [(0, Term::new(1.0, vec![2]))]).unwrap();
        let sys = SystemSpec::new(vec![1.0], f, BalanceClass::Unknown, None).unwrap();
        let mut r = rec(0.0, 1.0, 1.0);
        r.l1 = vec![1.0];
        r.linf = vec![1.0];
        let v = issue_verdicts(&sys, 1, &[r], &[]).unwrap();
        assert_eq!(v.mass_bound.status, Status::NotApplicable);
        assert_eq!(v.equal_diffusion_max_principle.status, Status::NotApplicable);
    }

    #[test]
    fn clamped_mass_is_credited() {
        let sys = reversible(1.0, 1.0, [1.0; 4]).unwrap();
        let mut r1 = rec(1.0, 4.0 + 1e-6, 1.0);
        r1.clamped_mass_cumulative = 1e-6;
        let v = issue_verdicts(&sys, 1, &[rec(0.0, 4.0, 1.0), r1], &[]).unwrap();
        assert_eq!(v.mass_bound.status, Status::Pass);
    }
}
