//! CSV, SVG and metadata output for budget sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{BudgetCurve, ExperimentConfig, Fit};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "protocol",
    "n",
    "epsilon",
    "eta",
    "budget",
    "success_rate",
    "ci_low",
    "ci_high",
    "trials",
    "seed",
];

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// One plotted curve.
pub struct Series<'a> {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub fit: Option<&'a Fit>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `results.csv`, one SVG per available figure and `sweep_meta.json`
/// into `dir`; returns the paths written.
pub fn emit_outputs(curves: &[BudgetCurve], config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let csv_path = dir.join("results.csv");
    let csv_err = |source| Error::Csv {
        path: csv_path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.protocol.name().to_string(),
                p.n.to_string(),
                c.epsilon.to_string(),
                c.eta.to_string(),
                p.budget.to_string(),
                p.success_rate.to_string(),
                p.ci_low.to_string(),
                p.ci_high.to_string(),
                p.trials.to_string(),
                c.seed.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err(&csv_path))?;
    written.push(csv_path.clone());

    let adaptive: Vec<Series> = curves.iter().filter(|c| c.protocol.is_adaptive()).map(series).collect();
    let nonadaptive: Vec<Series> = curves.iter().filter(|c| !c.protocol.is_adaptive()).map(series).collect();

    let mut figure = |name: &str, svg: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(io_err(&path))?;
        written.push(path);
        Ok(())
    };
    let has_points = |s: &[Series]| s.iter().any(|x| !x.points.is_empty());
    if has_points(&adaptive) {
        figure(
            "fig1_adaptive.svg",
            render_svg("Adaptive minimal budget (cubic fit)", &adaptive, false),
        )?;
    }
    if has_points(&nonadaptive) {
        figure(
            "fig2_nonadaptive.svg",
            render_svg("Non-adaptive minimal budget (exponential fit)", &nonadaptive, false),
        )?;
    }
    if has_points(&adaptive) && has_points(&nonadaptive) {
        let both: Vec<Series> = curves.iter().map(|c| Series { fit: None, ..series(c) }).collect();
        figure(
            "fig3_comparison.svg",
            render_svg("Adaptive vs non-adaptive minimal budget", &both, true),
        )?;
    }

    let meta_path = dir.join("sweep_meta.json");
    let warnings: Vec<String> = curves
        .iter()
        .flat_map(|c| {
            c.monotonicity_violations()
                .into_iter()
                .map(move |n| format!("{}: minimal budget decreases at n = {n}", c.protocol))
        })
        .collect();
    let meta = json!({
        "config": config,
        "pass_rule": format!(
            "Wilson 95% lower bound >= {} - {}",
            config.success_threshold, config.sweep.tolerance
        ),
        "curves": curves,
        "warnings": warnings,
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&meta_path, text + "\n").map_err(io_err(&meta_path))?;
    written.push(meta_path);
    Ok(written)
}

fn series(c: &BudgetCurve) -> Series<'_> {
    Series {
        label: c.protocol.name().to_string(),
        points: c
            .points
            .iter()
            .filter(|p| p.reached)
            .map(|p| (p.n as f64, p.budget as f64))
            .collect(),
        fit: c.fit.as_ref(),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        let e = v.abs().log10().floor();
        let m = v / 10f64.powf(e);
        if (m - m.round()).abs() < 1e-9 {
            format!("{}e{}", m.round(), e)
        } else {
            format!("{m:.1}e{e}")
        }
    } else if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round())
    } else {
        format!("{v:.2}")
    }
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|f| f * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Scatter plus fit lines against `n`, optionally with a log-scaled y axis.
pub fn render_svg(title: &str, series: &[Series], log_y: bool) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let x_min = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let (x_lo, x_hi) = (x_min - 0.5, x_max + 0.5);

    let ty = |y: f64| if log_y { y.log10() } else { y };
    let ys: Vec<f64> = all.iter().map(|p| p.1).filter(|y| !log_y || *y > 0.0).collect();
    let y_max_raw = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let y_min_raw = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let (y_lo, y_hi) = if log_y {
        (y_min_raw.log10().floor(), y_max_raw.log10().ceil().max(y_min_raw.log10().floor() + 1.0))
    } else {
        let step = nice_step(y_max_raw.max(1.0), 5);
        (0.0, (y_max_raw / step).ceil().max(1.0) * step)
    };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| TOP + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    let mut n = x_min.ceil();
    while n <= x_max {
        let x = sx(n);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{y1:.1}" stroke="black"/><text x="{x:.1}" y="{yt:.1}" text-anchor="middle">{n}</text>"#,
            y0 = TOP + plot_h,
            y1 = TOP + plot_h + 5.0,
            yt = TOP + plot_h + 20.0
        );
        n += 1.0;
    }
    let y_ticks: Vec<f64> = if log_y {
        (y_lo as i32..=y_hi as i32).map(f64::from).collect()
    } else {
        let step = nice_step(y_hi - y_lo, 5);
        (0..=((y_hi - y_lo) / step).round() as usize).map(|i| y_lo + i as f64 * step).collect()
    };
    for t in y_ticks {
        let y = sy(t);
        let label = if log_y { fmt_tick(10f64.powf(t)) } else { fmt_tick(t) };
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><line x1="{LEFT}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#dddddd"/><text x="{xt:.1}" y="{yl:.1}" text-anchor="end">{label}</text>"##,
            x0 = LEFT - 5.0,
            x1 = LEFT + plot_w,
            xt = LEFT - 8.0,
            yl = y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">number of qubits n</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        if log_y { "total shots (log scale)" } else { "total shots" },
        y = TOP + plot_h / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if let Some(fit) = ser.fit {
            let (a, b) = ser
                .points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
            let pts: Vec<String> = (0..=100)
                .map(|j| a + (b - a) * j as f64 / 100.0)
                .map(|x| (x, fit.eval(x)))
                .filter(|(_, y)| y.is_finite() && (!log_y || *y > 0.0))
                .map(|(x, y)| {
                    let v = ty(y).clamp(y_lo, y_hi);
                    format!("{:.1},{:.1}", sx(x), sy(v))
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="5,3" points="{}"/>"#,
                pts.join(" ")
            );
        }
        if ser.fit.is_none() && ser.points.len() > 1 {
            let pts: Vec<String> = ser
                .points
                .iter()
                .filter(|p| !log_y || p.1 > 0.0)
                .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(ty(y))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        for &(x, y) in ser.points.iter().filter(|p| !log_y || p.1 > 0.0) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{color}"/>"#,
                sx(x),
                sy(ty(y))
            );
        }
        let ly = TOP + 10.0 + 36.0 * i as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{ly:.1}" r="4" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx,
            lx + 10.0,
            ly + 4.0,
            escape(&ser.label)
        );
        if let Some(fit) = ser.fit {
            let desc = match fit {
                Fit::Cubic(c) => format!("cubic, R² = {:.3}", c.r_squared),
                Fit::Exponential(e) => format!("{:.2}^n, R² = {:.3}", e.base, e.r_squared),
            };
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
                lx + 10.0,
                ly + 18.0,
                escape(&desc)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
