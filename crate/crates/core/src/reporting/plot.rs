//! Scatter plots of estimate against true BER with the identity line and a
//! LOESS curve, written as CSV data plus a standalone SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{invalid, Result};
use crate::harness::EstimateRecord;

use super::loess::{loess_fit, DEFAULT_SPAN};
use super::summarize;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotArtifact {
    pub csv: PathBuf,
    pub svg: PathBuf,
    /// LOESS value per record, in record order; empty below 10 records.
    pub loess: Vec<f64>,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 56.0;
const AXIS_MAX: f64 = 0.5;

fn px(v: f64) -> f64 {
    MARGIN + v.clamp(0.0, AXIS_MAX) / AXIS_MAX * (SIZE - 2.0 * MARGIN)
}

fn py(v: f64) -> f64 {
    SIZE - px(v)
}

/// Writes `<dir>/<estimator>.csv` and `<dir>/<estimator>.svg`.
pub fn emit_plot(records: &[EstimateRecord], estimator: &str, dir: &Path) -> Result<PlotArtifact> {
    let rs: Vec<&EstimateRecord> = records.iter().filter(|r| r.estimates.contains_key(estimator)).collect();
    if rs.is_empty() {
        return invalid(format!("no records carry a `{estimator}` estimate"));
    }
    let x: Vec<f64> = rs.iter().map(|r| r.true_ber).collect();
    let y: Vec<f64> = rs.iter().map(|r| r.estimates[estimator]).collect();
    let fit = if rs.len() >= 10 {
        loess_fit(&x, &y, DEFAULT_SPAN)?
    } else {
        Vec::new()
    };

    let mut csv = String::from("run_id,true_ber,estimate,loess\n");
    for (i, r) in rs.iter().enumerate() {
        let l = fit.get(i).map(|v| format!("{v:.6}")).unwrap_or_default();
        let _ = writeln!(csv, "{},{:.6},{:.6},{l}", r.run_id, x[i], y[i]);
    }

    let summary = summarize(&rs, estimator)?;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let (lo, hi) = (px(0.0), px(AXIS_MAX));
    let _ = writeln!(
        svg,
        r#"<path d="M{lo} {lo2}H{hi}M{lo} {lo2}V{hi2}" stroke="black" fill="none"/>"#,
        lo2 = SIZE - lo,
        hi2 = SIZE - hi
    );
    for t in 0..=5 {
        let v = t as f64 * 0.1;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.1}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#,
            px(v),
            SIZE - MARGIN + 16.0,
            MARGIN - 6.0,
            py(v) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">true BER</text><text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">estimate</text>"#,
        SIZE / 2.0,
        SIZE - 12.0,
        SIZE / 2.0,
        SIZE / 2.0
    );
    for (a, b) in x.iter().zip(&y) {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="#1f77b4" fill-opacity="0.5"/>"##,
            px(*a),
            py(*b)
        );
    }
    let _ = writeln!(
        svg,
        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#444" stroke-dasharray="4 3"/>"##,
        px(0.0),
        py(0.0),
        px(AXIS_MAX),
        py(AXIS_MAX)
    );
    if !fit.is_empty() {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
        let pts: Vec<String> = order.iter().map(|&i| format!("{:.2},{:.2}", px(x[i]), py(fit[i]))).collect();
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" stroke="#d62728" stroke-width="2" fill="none"/>"##,
            pts.join(" ")
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="20">{estimator}: MSE {:.1}, 95% bounds ({:.1}, {:.1}), n = {}, LOESS span {DEFAULT_SPAN}</text>"#,
        summary.mse,
        summary.bound_lo,
        summary.bound_hi,
        summary.count
    );
    svg.push_str("</svg>\n");

    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{estimator}.csv"));
    let svg_path = dir.join(format!("{estimator}.svg"));
    fs::write(&csv_path, csv)?;
    fs::write(&svg_path, svg)?;
    Ok(PlotArtifact {
        csv: csv_path,
        svg: svg_path,
        loess: fit,
    })
}
