use serde::{Deserialize, Serialize};

use crate::grid::State;

/// Aggregates over one time window `[tau, tau + width]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowAggregate {
    pub tau: f64,
    /// Time actually covered by the records.
    pub width: f64,
    /// Space-time `L^2` norm per species.
    pub window_l2: Vec<f64>,
    /// `sup_x int_tau^{tau+w} u_i dt` per species.
    pub time_integral_sup: Vec<f64>,
    /// Largest `max_i |u_i|_inf` seen in the window.
    pub sup_linf: f64,
    pub complete: bool,
}

/// Trapezoidal-in-time accumulation between consecutive records.
#[derive(Debug, Clone)]
pub struct WindowAccumulator {
    tau: f64,
    width: f64,
    cell_volume: f64,
    last_t: f64,
    last_l2sq: Vec<f64>,
    last_values: Vec<Vec<f64>>,
    l2_integral: Vec<f64>,
    cell_integral: Vec<Vec<f64>>,
    sup_linf: f64,
    samples: usize,
}

fn l2_squared(values: &[f64], vol: f64) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() * vol
}

impl WindowAccumulator {
    /// Opens a window whose left endpoint is the record `state`.
    pub fn start(tau: f64, width: f64, state: &State, sup_linf: f64) -> Self {
        let vol = state.domain().cell_volume();
        let last_values: Vec<Vec<f64>> = state.fields.iter().map(|f| f.values().to_vec()).collect();
        Self {
            tau,
            width,
            cell_volume: vol,
            last_t: state.t,
            last_l2sq: last_values.iter().map(|v| l2_squared(v, vol)).collect(),
            l2_integral: vec![0.0; last_values.len()],
            cell_integral: last_values.iter().map(|v| vec![0.0; v.len()]).collect(),
            last_values,
            sup_linf,
            samples: 0,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn has_samples(&self) -> bool {
        self.samples > 0
    }

    pub fn is_complete(&self) -> bool {
        self.last_t >= self.tau + self.width * (1.0 - 1e-9)
    }

    pub fn accumulate(&mut self, state: &State, sup_linf: f64) {
        let dt = state.t - self.last_t;
        let half = 0.5 * dt;
        for (i, f) in state.fields.iter().enumerate() {
            let values = f.values();
            let l2sq = l2_squared(values, self.cell_volume);
            self.l2_integral[i] += half * (self.last_l2sq[i] + l2sq);
            self.last_l2sq[i] = l2sq;
            let last = &mut self.last_values[i];
            for ((acc, prev), v) in self.cell_integral[i].iter_mut().zip(last.iter_mut()).zip(values) {
                *acc += half * (*prev + v);
                *prev = *v;
            }
        }
        self.last_t = state.t;
        self.sup_linf = self.sup_linf.max(sup_linf);
        self.samples += 1;
    }

    pub fn snapshot(&self, complete: bool) -> WindowAggregate {
        WindowAggregate {
            tau: self.tau,
            width: self.last_t - self.tau,
            window_l2: self.l2_integral.iter().map(|v| v.max(0.0).sqrt()).collect(),
            time_integral_sup: self.cell_integral.iter().map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect(),
            sup_linf: self.sup_linf,
            complete,
        }
    }

    pub fn close(self) -> WindowAggregate {
        let complete = self.is_complete();
        self.snapshot(complete)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::super::Monitor;
    use crate::grid::{BoxDomain, ScalarField, State};

    fn state_at(d: &Arc<BoxDomain>, values: Vec<f64>, t: f64) -> State {
        State::new(vec![ScalarField::new(d.clone(), values).unwrap()], t).unwrap()
    }

    #[test]
    fn constant_state_window() {
        let d = Arc::new(BoxDomain::cube(2, 1.0, 4).unwrap());
        let mut mon = Monitor::new(None, 1.0).unwrap();
        for k in 0..=20 {
            mon.push(&state_at(&d, vec![3.0; 16], k as f64 * 0.1), 0.0).unwrap();
        }
        let w = mon.windows();
        assert_eq!(w.len(), 2);
        for agg in w {
            assert!(agg.complete);
            assert!((agg.window_l2[0] - 3.0).abs() < 1e-12);
            assert!((agg.time_integral_sup[0] - 3.0).abs() < 1e-12);
            assert_eq!(agg.sup_linf, 3.0);
        }
        assert_eq!((w[0].tau, w[1].tau), (0.0, 1.0));
    }

    #[test]
    fn decaying_profile_window() {
        let d = Arc::new(BoxDomain::cube(1, 1.0, 4).unwrap());
        let mut mon = Monitor::new(None, 1.0).unwrap();
        let dt = 1e-3;
        for k in 0..=1000 {
            let t = k as f64 * dt;
            mon.push(&state_at(&d, vec![(-t).exp(); 4], t), 0.0).unwrap();
        }
        let w = &mon.windows()[0];
        let l2 = ((1.0 - (-2.0_f64).exp()) / 2.0).sqrt();
        let int = 1.0 - (-1.0_f64).exp();
        assert!((w.window_l2[0] - l2).abs() < 1e-4);
        assert!((w.time_integral_sup[0] - int).abs() < 1e-4);
        assert!(mon.partial_window().is_none());
    }

    #[test]
    fn sup_of_time_integral_is_per_cell() {
        // cell 0 is large early, cell 1 late; the sup is of the integral, not of
        // the pointwise sup
        let d = Arc::new(BoxDomain::cube(1, 2.0, 2).unwrap());
        let mut mon = Monitor::new(None, 1.0).unwrap();
        mon.push(&state_at(&d, vec![2.0, 0.0], 0.0), 0.0).unwrap();
        mon.push(&state_at(&d, vec![0.0, 2.0], 1.0), 0.0).unwrap();
        let w = &mon.windows()[0];
        assert!((w.time_integral_sup[0] - 1.0).abs() < 1e-15);
        assert_eq!(w.sup_linf, 2.0);
    }
}
