//! Test-phase plot data (CSV) and static SVG renderings: a 1:1 scatter per
//! champion and one Taylor diagram for all champions.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::report::write_file;
use super::GridReport;
use crate::error::Result;
use crate::metrics::{deviation_series, taylor_stats, EvalPair, TaylorStats};
use crate::model::Family;

const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

fn color(family: Family) -> &'static str {
    COLORS[Family::ALL.iter().position(|&f| f == family).unwrap_or(0)]
}

pub fn scatter_csv(pair: &EvalPair) -> String {
    let mut s = String::from("observed,predicted\n");
    for (o, p) in pair.observed().iter().zip(pair.predicted()) {
        let _ = writeln!(s, "{o},{p}");
    }
    s
}

pub fn deviation_csv(pair: &EvalPair) -> String {
    let mut s = String::from("index,deviation\n");
    for (i, d) in deviation_series(pair) {
        let _ = writeln!(s, "{i},{d}");
    }
    s
}

pub fn taylor_csv(t: &TaylorStats) -> String {
    format!(
        "std_observed,std_predicted,cc\n{},{},{}\n",
        t.std_observed, t.std_predicted, t.cc
    )
}

/// Writes every plot file for the report's champions into `dir`.
pub fn emit_plots(report: &GridReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |rel: String, contents: String| -> Result<()> {
        let path = dir.join(rel);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };

    let mut taylor_points = Vec::new();
    for champ in &report.champions {
        if champ.test.is_none() {
            continue;
        }
        let Ok(pair) = EvalPair::new(champ.observed.clone(), champ.predicted.clone()) else {
            continue;
        };
        let slug = champ.family.slug();
        put(format!("{slug}/scatter.csv"), scatter_csv(&pair))?;
        put(format!("{slug}/deviation.csv"), deviation_csv(&pair))?;
        if let Ok(t) = taylor_stats(&pair) {
            put(format!("{slug}/taylor.csv"), taylor_csv(&t))?;
            taylor_points.push((champ.family, t));
        }
        put(format!("scatter_{slug}.svg"), scatter_svg(champ.family, &pair))?;
    }
    if !taylor_points.is_empty() {
        put("taylor.svg".into(), taylor_svg(&taylor_points))?;
    }
    Ok(written)
}

fn svg_open(s: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Round-ish tick step giving roughly `target` ticks over `span`.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn tick_label(t: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{t:.decimals$}")
}

pub fn scatter_svg(family: Family, pair: &EvalPair) -> String {
    let (size, margin) = (420.0, 60.0);
    let plot = size - 2.0 * margin;
    let all = pair.observed().iter().chain(pair.predicted());
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
        (a.min(v), b.max(v))
    });
    lo = lo.min(0.0);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    hi += pad;
    let to_x = |v: f64| margin + (v - lo) / (hi - lo) * plot;
    let to_y = |v: f64| size - margin - (v - lo) / (hi - lo) * plot;

    let mut s = String::new();
    svg_open(&mut s, size, size);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{} (testing phase)</text>"#,
        size / 2.0,
        family
    );
    let _ = writeln!(
        s,
        r##"<rect x="{margin:.1}" y="{margin:.1}" width="{plot:.1}" height="{plot:.1}" fill="none" stroke="#333"/>"##
    );
    let step = tick_step(hi - lo, 5.0);
    let mut k = (lo / step).ceil() as i64;
    while k as f64 * step <= hi + 1e-9 * step {
        let t = k as f64 * step;
        let label = tick_label(t, step);
        let (x, y) = (to_x(t), to_y(t));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            size - margin,
            size - margin + 5.0,
            size - margin + 18.0
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{margin:.2}" y2="{y:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            margin - 5.0,
            margin - 8.0,
            y + 4.0
        );
        k += 1;
    }
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="6 4"/>"##,
        to_x(lo),
        to_y(lo),
        to_x(hi),
        to_y(hi)
    );
    let c = color(family);
    for (o, p) in pair.observed().iter().zip(pair.predicted()) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}" fill-opacity="0.7"/>"#,
            to_x(*o),
            to_y(*p)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Observed air velocity (m/s)</text>"#,
        size / 2.0,
        size - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">Predicted air velocity (m/s)</text>"#,
        size / 2.0,
        size / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Polar Taylor diagram: radius is the standard deviation, angle is
/// `acos(cc)`. The observation reference sits on the horizontal axis.
/// Switches to a half-plane when any correlation is negative.
pub fn taylor_svg(points: &[(Family, TaylorStats)]) -> String {
    let reference = points[0].1.std_observed;
    let max_std = points
        .iter()
        .map(|(_, t)| t.std_predicted)
        .fold(reference, f64::max);
    let radius_max = if max_std > 0.0 { max_std * 1.25 } else { 1.0 };
    let half = points.iter().any(|(_, t)| t.cc < 0.0);
    let (r_px, margin) = (360.0, 70.0);
    let width = if half {
        2.0 * r_px + 2.0 * margin
    } else {
        r_px + 2.0 * margin + 140.0
    };
    let height = r_px + 2.0 * margin;
    let (ox, oy) = (if half { margin + r_px } else { margin }, margin + r_px);
    let scale = r_px / radius_max;
    let at = |r: f64, theta: f64| (ox + r * scale * theta.cos(), oy - r * scale * theta.sin());
    let max_angle = if half { 2.0 * FRAC_PI_2 } else { FRAC_PI_2 };

    let mut s = String::new();
    svg_open(&mut s, width, height);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="14">Taylor diagram (testing phase)</text>"#,
        ox + if half { 0.0 } else { r_px / 2.0 }
    );

    // standard deviation arcs
    let step = tick_step(radius_max, 4.0);
    let mut k = 1;
    while k as f64 * step <= radius_max + 1e-9 * step {
        let r = k as f64 * step;
        let label = tick_label(r, step);
        let (x0, y0) = at(r, 0.0);
        let (x1, y1) = at(r, max_angle);
        let _ = writeln!(
            s,
            r##"<path d="M {x0:.2} {y0:.2} A {rad:.2} {rad:.2} 0 0 0 {x1:.2} {y1:.2}" fill="none" stroke="#ccc"/><text x="{x0:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            oy + 16.0,
            rad = r * scale
        );
        k += 1;
    }
    // outer boundary and axes
    let (bx0, by0) = at(radius_max, 0.0);
    let (bx1, by1) = at(radius_max, max_angle);
    let _ = writeln!(
        s,
        r##"<path d="M {ox:.2} {oy:.2} L {bx0:.2} {by0:.2} A {rad:.2} {rad:.2} 0 0 0 {bx1:.2} {by1:.2} Z" fill="none" stroke="#333"/>"##,
        rad = radius_max * scale
    );
    // correlation rays
    let mut ccs = vec![0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.99];
    if half {
        ccs.extend([-0.2, -0.4, -0.6, -0.8, -0.9, -0.95, -0.99]);
    }
    for c in ccs {
        let theta = f64::acos(c);
        let (x, y) = at(radius_max, theta);
        let (lx, ly) = at(radius_max * 1.06, theta);
        let _ = writeln!(
            s,
            r##"<line x1="{ox:.2}" y1="{oy:.2}" x2="{x:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{lx:.2}" y="{:.2}" text-anchor="middle" font-size="10">{c}</text>"##,
            ly + 4.0
        );
    }
    let (cx, cy) = at(radius_max * 1.16, max_angle / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{cx:.2}" y="{cy:.2}" text-anchor="middle">Correlation</text>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Standard deviation (m/s)</text>"#,
        if half { ox } else { ox + r_px / 2.0 },
        oy + 40.0
    );
    // reference arc and point
    let (rx0, ry0) = at(reference, 0.0);
    let (rx1, ry1) = at(reference, max_angle);
    let _ = writeln!(
        s,
        r##"<path d="M {rx0:.2} {ry0:.2} A {rad:.2} {rad:.2} 0 0 0 {rx1:.2} {ry1:.2}" fill="none" stroke="#555" stroke-dasharray="4 3"/>"##,
        rad = reference * scale
    );
    let _ = writeln!(
        s,
        r##"<rect x="{:.2}" y="{:.2}" width="9" height="9" fill="#000"/>"##,
        rx0 - 4.5,
        ry0 - 4.5
    );

    let legend_x = if half { margin } else { ox + r_px + 30.0 };
    let _ = writeln!(
        s,
        r##"<rect x="{legend_x:.1}" y="{:.1}" width="9" height="9" fill="#000"/><text x="{:.1}" y="{:.1}">Observed</text>"##,
        margin - 4.5,
        legend_x + 16.0,
        margin + 4.0
    );
    for (k, (family, t)) in points.iter().enumerate() {
        let (x, y) = at(t.std_predicted, t.cc.acos());
        let c = color(*family);
        let _ = writeln!(
            s,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="6" fill="{c}" stroke="#000"/>"##
        );
        let ly = margin + 22.0 * (k as f64 + 1.0);
        let _ = writeln!(
            s,
            r##"<circle cx="{:.1}" cy="{ly:.1}" r="5" fill="{c}" stroke="#000"/><text x="{:.1}" y="{:.1}">{family}</text>"##,
            legend_x + 4.5,
            legend_x + 16.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
