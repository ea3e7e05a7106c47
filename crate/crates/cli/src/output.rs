//! CSV tables and the log-log plot.
//!
//! Numbers are written with `{:.16e}`, 17 significant digits, so parsing a
//! table back reproduces the in-memory values exactly.

use std::fmt::Write as _;
use std::path::Path;

use advect_core::analysis::{ConvergenceRow, EnergyReport, EocFit, ErrorReport, CONVERGENCE_HEADER};
use advect_core::scheme::StepReport;

use crate::error::CliError;

pub const REPORT_HEADER: &str = "step,time,mass,min,max,l1,l2";
pub const ERROR_HEADER: &str = "l1_at_t,linf_t_l1,sampling_density,estimated_quadrature_error";
pub const EOC_HEADER: &str = "slope,intercept,residual,window_lo,window_hi,pass";

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn e(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn report_csv(report: &StepReport) -> String {
    let mut s = format!("{REPORT_HEADER}\n");
    for r in &report.records {
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.step, e(r.time), e(r.mass), e(r.min), e(r.max), e(r.l1), e(r.l2));
    }
    s
}

pub fn energy_csv(row: &ConvergenceRow) -> String {
    format!("{CONVERGENCE_HEADER}\n{}\n", row.to_csv())
}

pub fn error_csv(report: &ErrorReport) -> String {
    format!(
        "{ERROR_HEADER}\n{},{},{},{}\n",
        e(report.l1_at_t),
        e(report.linf_t_l1),
        report.sampling_density,
        e(report.estimated_quadrature_error)
    )
}

pub fn eoc_csv(fit: &EocFit, window: [f64; 2], pass: bool) -> String {
    format!(
        "{EOC_HEADER}\n{},{},{},{},{},{}\n",
        e(fit.slope),
        e(fit.intercept),
        e(fit.residual),
        e(window[0]),
        e(window[1]),
        pass
    )
}

/// Row of the energy table for a finished run.
pub fn convergence_row(h: f64, dt: f64, xi: f64, mesh: &str, l1_error: f64, energy: &EnergyReport) -> ConvergenceRow {
    ConvergenceRow {
        h,
        dt,
        xi,
        mesh: mesh.to_string(),
        l1_error,
        e_h: energy.e_h,
        q_h: energy.q_h,
        eps_h: energy.eps_h,
        identity_residual: energy.identity_residual,
    }
}

/// A parsed CSV file: header names and raw fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Validation("empty CSV".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<String> = line.split(',').map(str::to_string).collect();
            if fields.len() != header.len() {
                return Err(CliError::Validation(format!(
                    "CSV row {} has {} fields, header has {}",
                    i + 1,
                    fields.len(),
                    header.len()
                )));
            }
            rows.push(fields);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column values parsed as numbers.
    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let c = self
            .column(name)
            .ok_or_else(|| CliError::Validation(format!("no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| {
                r[c].parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("bad number `{}` in column `{name}`", r[c])))
            })
            .collect()
    }
}

/// Self-contained SVG log-log plot of error against mesh size with the
/// fitted line and a half-order reference slope.
pub fn loglog_svg(points: &[(f64, f64)], fit: &EocFit) -> String {
    let (w, h, pad) = (640.0, 480.0, 70.0);
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        ((lo - 0.1).floor(), (hi + 0.1).ceil())
    };
    let (x0, x1) = span(&lx);
    let (y0, y1) = span(&ly);
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = px(d as f64);
        let _ = writeln!(s, r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{pad}" stroke="#ddd"/>"##, h - pad);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{d}</text>"#, h - pad + 18.0);
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = py(d as f64);
        let _ = writeln!(s, r##"<line x1="{pad}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, w - pad);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{d}</text>"#, pad - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">h</text>"#, w / 2.0, h - 20.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">L1 error at t</text>"#,
        h / 2.0,
        h / 2.0
    );

    let (a, b) = (lx.iter().cloned().fold(f64::INFINITY, f64::min), lx.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let line = |slope: f64, at: f64| at + slope * (b - a);
    // Fit in natural logs is the same line in log10 coordinates.
    let fy = |x: f64| (fit.slope * x * std::f64::consts::LN_10 + fit.intercept) / std::f64::consts::LN_10;
    let _ = writeln!(
        s,
        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#1f77b4" stroke-width="1.5"/>"##,
        px(a),
        py(fy(a)),
        px(b),
        py(fy(b))
    );
    let ref_start = fy(a) - 0.15;
    let _ = writeln!(
        s,
        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="6 4"/>"##,
        px(a),
        py(ref_start),
        px(b),
        py(line(0.5, ref_start))
    );
    for (x, y) in lx.iter().zip(&ly) {
        let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="4" fill="#d62728"/>"##, px(*x), py(*y));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">fitted slope {:.4}; dashed: slope 1/2</text>"#,
        pad + 10.0,
        pad + 20.0,
        fit.slope
    );
    s.push_str("</svg>\n");
    s
}
