//! Well-mixed reference solution: for spatially constant data the Laplacian
//! vanishes and the system reduces to the ODE `u' = f(u)`, integrated here
//! with an adaptive Dormand-Prince 5(4) pair.

use crate::error::{Error, Result};
use crate::systems::SystemSpec;

const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-14;
const MAX_STEPS: usize = 10_000_000;
/// Growth beyond this multiple of `1 + |u0|_inf` is reported as blow-up.
const BLOWUP_FACTOR: f64 = 1e12;

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// `u(t_end)` for `u' = f(u)`, `u(0) = u0`.
pub fn wellmixed_oracle(system: &SystemSpec, u0: &[f64], t_end: f64) -> Result<Vec<f64>> {
    Ok(wellmixed_trajectory(system, u0, &[t_end])?.pop().expect("one output time"))
}

/// `u(t)` at each of the increasing `times`.
pub fn wellmixed_trajectory(system: &SystemSpec, u0: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let m = system.m();
    if u0.len() != m {
        return Err(Error::InvalidArgument(format!("u0 has {} entries for {m} species", u0.len())));
    }
    if u0.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Precondition(format!("well-mixed initial data {u0:?} must be finite and nonnegative")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("output times must be nonnegative and nondecreasing".into()));
    }
    let field = system.field();
    let rhs = |u: &[f64], out: &mut [f64]| -> Result<()> { field.eval_into(u, out) };

    let blowup = BLOWUP_FACTOR * (1.0 + u0.iter().fold(0.0_f64, |a, b| a.max(b.abs())));
    let mut t = 0.0;
    let mut y = u0.to_vec();
    let mut k = vec![vec![0.0; m]; 7];
    let mut stage = vec![0.0; m];
    let mut y5 = vec![0.0; m];
    let mut h = times.last().copied().unwrap_or(0.0).max(1e-3) * 1e-3;
    let mut outputs = Vec::with_capacity(times.len());
    let mut steps = 0;

    rhs(&y, &mut k[0])?;
    for &target in times {
        while t < target {
            if steps >= MAX_STEPS {
                return Err(Error::SolverDivergence { iterations: steps, residual: f64::NAN });
            }
            steps += 1;
            let last = t + h >= target;
            let h_step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..m {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += h_step * A[s][j] * kj[i];
                    }
                    stage[i] = acc;
                }
                if rhs(&stage, &mut k[s]).is_err() {
                    return Err(Error::BlowUp { t: t + C[s] * h_step, sup: f64::INFINITY });
                }
            }
            let mut err = 0.0;
            for i in 0..m {
                let mut hi5 = y[i];
                let mut diff = 0.0;
                for s in 0..7 {
                    hi5 += h_step * B5[s] * k[s][i];
                    diff += h_step * (B5[s] - B4[s]) * k[s][i];
                }
                y5[i] = hi5;
                let scale = ATOL + RTOL * y[i].abs().max(hi5.abs());
                err += (diff / scale).powi(2);
            }
            let err = (err / m as f64).sqrt();
            if !err.is_finite() {
                h = 0.25 * h_step;
                if h < 1e-14 * t.max(1.0) {
                    return Err(Error::BlowUp { t, sup: f64::INFINITY });
                }
                continue;
            }
            if err <= 1.0 {
                t = if last { target } else { t + h_step };
                std::mem::swap(&mut y, &mut y5);
                // first-same-as-last: the seventh stage is f(y_{n+1})
                k.swap(0, 6);
                let sup = y.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
                if sup > blowup {
                    return Err(Error::BlowUp { t, sup });
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !(last && err <= 1.0) {
                h = h_step * factor;
            }
            if h < 1e-14 * t.max(1.0) {
                return Err(Error::BlowUp { t, sup: y.iter().fold(0.0_f64, |a, b| a.max(b.abs())) });
            }
        }
        outputs.push(y.clone());
    }
    Ok(outputs)
}
