use std::fmt::Write as _;
use std::path::Path;

use super::{MetricRecord, WindowAggregate};
use crate::error::Result;
use crate::grid::snapshot::write_atomic;

/// `t, L1_1..m, Linf_1..m, total_mass, min_value, clamped`.
pub fn metrics_csv(records: &[MetricRecord]) -> String {
    let m = records.first().map_or(0, |r| r.l1.len());
    let mut out = String::from("t");
    for i in 1..=m {
        write!(out, ",L1_{i}").unwrap();
    }
    for i in 1..=m {
        write!(out, ",Linf_{i}").unwrap();
    }
    out.push_str(",total_mass,min_value,clamped\n");
    for r in records {
        write!(out, "{}", r.t).unwrap();
        for v in r.l1.iter().chain(&r.linf) {
            write!(out, ",{v}").unwrap();
        }
        writeln!(out, ",{},{},{}", r.total_weighted_mass, r.min_value, r.clamped_mass_cumulative).unwrap();
    }
    out
}

/// `tau, width, complete, window_L2_1..m, time_integral_sup_1..m, sup_linf`.
pub fn windows_csv(windows: &[WindowAggregate]) -> String {
    let m = windows.first().map_or(0, |w| w.window_l2.len());
    let mut out = String::from("tau,width,complete");
    for i in 1..=m {
        write!(out, ",window_L2_{i}").unwrap();
    }
    for i in 1..=m {
        write!(out, ",time_integral_sup_{i}").unwrap();
    }
    out.push_str(",sup_linf\n");
    for w in windows {
        write!(out, "{},{},{}", w.tau, w.width, w.complete).unwrap();
        for v in w.window_l2.iter().chain(&w.time_integral_sup) {
            write!(out, ",{v}").unwrap();
        }
        writeln!(out, ",{}", w.sup_linf).unwrap();
    }
    out
}

pub fn write_metrics_csv(path: &Path, records: &[MetricRecord]) -> Result<()> {
    write_atomic(path, metrics_csv(records).as_bytes())
}

pub fn write_windows_csv(path: &Path, windows: &[WindowAggregate]) -> Result<()> {
    write_atomic(path, windows_csv(windows).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_header_and_rows() {
        let r = MetricRecord {
            t: 0.5,
            l1: vec![1.0, 2.0],
            linf: vec![3.0, 4.0],
            total_weighted_mass: 3.0,
            min_value: 0.25,
            clamped_mass_cumulative: 0.0,
            weighted_sum_linf: 7.0,
        };
        let csv = metrics_csv(&[r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,L1_1,L1_2,Linf_1,Linf_2,total_mass,min_value,clamped"));
        assert_eq!(lines.next(), Some("0.5,1,2,3,4,3,0.25,0"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn windows_header() {
        let w = WindowAggregate {
            tau: 1.0,
            width: 1.0,
            window_l2: vec![0.5],
            time_integral_sup: vec![0.75],
            sup_linf: 1.0,
            complete: true,
        };
        assert_eq!(
            windows_csv(&[w]),
            "tau,width,complete,window_L2_1,time_integral_sup_1,sup_linf\n1,1,true,0.5,0.75,1\n"
        );
    }
}
