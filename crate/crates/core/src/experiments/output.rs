//! CSV and SVG emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::harness::{ConvergenceRecord, RateAxis};
use crate::error::Result;

pub const CSV_HEADER: [&str; 9] = ["problem", "N", "M", "J", "s", "error", "tail_bound", "assemble_ms", "solve_ms"];

/// Writes records with a header row (also for an empty list).
pub fn write_csv(path: &Path, records: &[ConvergenceRecord]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ConvergenceRecord>> {
    let mut r = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(crate::error::Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}

/// One polyline of a log-log plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn from_records(label: impl Into<String>, records: &[ConvergenceRecord], axis: RateAxis) -> Self {
        Self {
            label: label.into(),
            points: records.iter().filter(|r| r.error > 0.0).map(|r| (axis.of(r), r.error)).collect(),
        }
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log plot of the series with dash-dotted guide lines of the given slopes,
/// anchored at the first point of the first series.
pub fn render_svg(title: &str, x_label: &str, series: &[Series], guides: &[f64]) -> String {
    let (w, h, pad) = (640.0, 480.0, 60.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let (y0, y1) = (y0.floor(), y1.ceil());
    let px = |x: f64| pad + (x.log10() - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y.log10() - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for e in (y0 as i64)..=(y1 as i64) {
        let y = py(10f64.powi(e as i32));
        let _ = writeln!(s, r#"<line x1="{pad}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="lightgray"/>"#, w - pad);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11">1e{e}</text>"#, pad - 4.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, w / 2.0, h - 16.0, escape(x_label));
    if let Some(&(ax, ay)) = series.first().and_then(|s| s.points.first()) {
        let xe = 10f64.powf(x1);
        for (i, g) in guides.iter().enumerate() {
            let ye = ay * (xe / ax).powf(*g);
            let _ = writeln!(
                s,
                r#"<polyline class="guide" points="{:.2},{:.2} {:.2},{:.2}" fill="none" stroke="gray" stroke-dasharray="8,3,2,3"/>"#,
                px(ax),
                py(ay),
                px(xe),
                py(ye).clamp(pad, h - pad)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="gray">slope {g}</text>"#,
                w - pad - 70.0,
                pad + 16.0 + 14.0 * i as f64
            );
        }
    }
    for (i, se) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = se.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="data" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for &(x, y) in &se.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(x), py(y));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
            pad + 8.0,
            h - pad - 10.0 - 14.0 * i as f64,
            escape(&se.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reference slopes `2α - (d+1)` and `4α - 2(d+1)`.
pub fn guide_slopes(config: &ExperimentConfig) -> [f64; 2] {
    let a = config.alpha();
    let d1 = config.degree as f64 + 1.0;
    [2.0 * a - d1, 4.0 * a - 2.0 * d1]
}

/// Writes `<stem>.csv` and `<stem>.svg` into the configured output directory.
pub fn emit_outputs(records: &[ConvergenceRecord], config: &ExperimentConfig, stem: &str, axis: RateAxis) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&config.output_dir)?;
    let csv = config.output_dir.join(format!("{stem}.csv"));
    write_csv(&csv, records)?;
    let svg = config.output_dir.join(format!("{stem}.svg"));
    let x_label = match axis {
        RateAxis::N => "N",
        RateAxis::M => "M",
        RateAxis::J => "J = M/N",
    };
    let title = format!("{} (d = {}, H^{} error)", config.problem, config.degree, config.error_order_s);
    let series = [Series::from_records(format!("{}", config.oversampling), records, axis)];
    fs::write(&svg, render_svg(&title, x_label, &series, &guide_slopes(config)))?;
    Ok(vec![csv, svg])
}
