//! Static SVG line charts with linear axes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::snapshot::write_atomic;
use crate::monitor::{MetricRecord, WindowAggregate};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Maps data coordinates to the plot area.
#[derive(Debug, Clone, Copy)]
pub struct Viewport {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Viewport {
    fn fit(series: &[Series]) -> Self {
        let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (0.0_f64, f64::NEG_INFINITY);
        for &(x, y) in pts() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x1.is_nan() || x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1.is_nan() || y1 <= y0 {
            y1 = y0 + 1.0;
        } else {
            y1 += 0.05 * (y1 - y0);
        }
        Self { x0, x1, y0, y1 }
    }

    pub fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    pub fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one chart; every series must be nonempty.
pub fn render_chart(chart: &Chart) -> Result<String> {
    if chart.series.is_empty() || chart.series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::InvalidArgument(format!("chart '{}' has an empty series", chart.title)));
    }
    let vp = Viewport::fit(&chart.series);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="18" font-size="13">{}</text>"#, LEFT, escape(&chart.title)).unwrap();

    let (ax0, ax1, ay0, ay1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    writeln!(out, r#"<line x1="{ax0}" y1="{ay0}" x2="{ax1}" y2="{ay0}" stroke="black"/>"#).unwrap();
    writeln!(out, r#"<line x1="{ax0}" y1="{ay0}" x2="{ax0}" y2="{ay1}" stroke="black"/>"#).unwrap();
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let x = vp.x0 + f * (vp.x1 - vp.x0);
        let y = vp.y0 + f * (vp.y1 - vp.y0);
        let (px, py) = (vp.px(x), vp.py(y));
        writeln!(out, r#"<line x1="{px:.2}" y1="{ay0}" x2="{px:.2}" y2="{}" stroke="black"/>"#, ay0 + 4.0).unwrap();
        writeln!(out, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{x:.3e}</text>"#, ay0 + 16.0).unwrap();
        writeln!(out, r#"<line x1="{}" y1="{py:.2}" x2="{ax0}" y2="{py:.2}" stroke="black"/>"#, ax0 - 4.0).unwrap();
        writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.3e}</text>"#, ax0 - 6.0, py + 4.0).unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        0.5 * (ax0 + ax1),
        HEIGHT - 10.0,
        escape(&chart.x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        0.5 * (ay0 + ay1),
        0.5 * (ay0 + ay1),
        escape(&chart.y_label)
    )
    .unwrap();

    for (k, s) in chart.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut points = String::new();
        for &(x, y) in s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            if !points.is_empty() {
                points.push(' ');
            }
            write!(points, "{:.2},{:.2}", vp.px(x), vp.py(y)).unwrap();
        }
        writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#).unwrap();
        let ly = TOP + 14.0 * k as f64;
        writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            ax1 + 10.0,
            ax1 + 30.0
        )
        .unwrap();
        writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, ax1 + 35.0, ly + 4.0, escape(&s.name)).unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_chart(path: &Path, chart: &Chart) -> Result<()> {
    let svg = render_chart(chart)?;
    write_atomic(path, svg.as_bytes())
}

pub fn linf_chart(records: &[MetricRecord]) -> Chart {
    let m = records.first().map_or(0, |r| r.linf.len());
    Chart {
        title: "Sup norm per species".into(),
        x_label: "t".into(),
        y_label: "Linf".into(),
        series: (0..m)
            .map(|i| Series { name: format!("u_{}", i + 1), points: records.iter().map(|r| (r.t, r.linf[i])).collect() })
            .collect(),
    }
}

pub fn mass_chart(records: &[MetricRecord]) -> Chart {
    Chart {
        title: "Total weighted mass".into(),
        x_label: "t".into(),
        y_label: "mass".into(),
        series: vec![Series {
            name: "total mass".into(),
            points: records.iter().map(|r| (r.t, r.total_weighted_mass)).collect(),
        }],
    }
}

pub fn windows_chart(windows: &[WindowAggregate]) -> Chart {
    let m = windows.first().map_or(0, |w| w.window_l2.len());
    let mut series = vec![Series { name: "window sup".into(), points: windows.iter().map(|w| (w.tau, w.sup_linf)).collect() }];
    for i in 0..m {
        series.push(Series {
            name: format!("L2 u_{}", i + 1),
            points: windows.iter().map(|w| (w.tau, w.window_l2[i])).collect(),
        });
        series.push(Series {
            name: format!("int sup u_{}", i + 1),
            points: windows.iter().map(|w| (w.tau, w.time_integral_sup[i])).collect(),
        });
    }
    Chart { title: "Window aggregates".into(), x_label: "tau".into(), y_label: "value".into(), series }
}

/// Writes `linf.svg`, `mass.svg` and, with any windows, `windows.svg`.
pub fn emit_svg(records: &[MetricRecord], windows: &[WindowAggregate], dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to plot".into()));
    }
    let mut written = Vec::new();
    let mut charts = vec![("linf.svg", linf_chart(records)), ("mass.svg", mass_chart(records))];
    if !windows.is_empty() {
        charts.push(("windows.svg", windows_chart(windows)));
    }
    for (name, chart) in charts {
        let path = dir.join(name);
        write_chart(&path, &chart)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, mass: f64) -> MetricRecord {
        MetricRecord {
            t,
            l1: vec![mass / 2.0; 2],
            linf: vec![1.0, 2.0],
            total_weighted_mass: mass,
            min_value: 0.0,
            clamped_mass_cumulative: 0.0,
            weighted_sum_linf: 3.0,
        }
    }

    #[test]
    fn one_polyline_per_series() {
        let records = [rec(0.0, 2.0), rec(1.0, 2.0)];
        assert_eq!(render_chart(&linf_chart(&records)).unwrap().matches("<polyline").count(), 2);
        assert_eq!(render_chart(&mass_chart(&records)).unwrap().matches("<polyline").count(), 1);
    }

    #[test]
    fn empty_series_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.svg");
        let chart = mass_chart(&[]);
        assert!(write_chart(&path, &chart).is_err());
        assert!(!path.exists());
        assert!(emit_svg(&[], &[], dir.path()).is_err());
    }

    #[test]
    fn conservative_mass_is_flat() {
        let records: Vec<_> = (0..100).map(|k| rec(k as f64 * 0.1, 4.0 * (1.0 + 1e-9 * (k % 3) as f64))).collect();
        let vp = Viewport::fit(&mass_chart(&records).series);
        let ys: Vec<f64> = records.iter().map(|r| vp.py(r.total_weighted_mass)).collect();
        let spread = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ys.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(spread < 1.0, "{spread}");
    }
}
