//! Experimental order of convergence.

use std::io::{BufRead, Write};

use crate::{Error, Result};

/// Least-squares fit `log e = slope log h + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EocFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root of the sum of squared residuals in log space.
    pub residual: f64,
}

pub fn estimate_eoc(rows: &[(f64, f64)]) -> Result<EocFit> {
    if rows.len() < 2 {
        return Err(Error::invalid("at least two rows are needed for a slope"));
    }
    for (i, &(h, e)) in rows.iter().enumerate() {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid(format!("row {i}: mesh size must be positive, got {h}")));
        }
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::invalid(format!(
                "row {i}: error must be positive, got {e} (an exact coincidence has no order)"
            )));
        }
        if rows[..i].iter().any(|&(g, _)| g == h) {
            return Err(Error::invalid(format!("row {i}: duplicate mesh size {h}")));
        }
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(EocFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub dt: f64,
    pub xi: f64,
    pub mesh: String,
    pub l1_error: f64,
    pub e_h: f64,
    pub q_h: f64,
    pub eps_h: f64,
    pub identity_residual: f64,
}

pub const CONVERGENCE_HEADER: &str = "h,dt,xi,mesh,l1_error,E_h,Q_h,eps_h,identity_residual";

impl ConvergenceRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.h, self.dt, self.xi, self.mesh, self.l1_error, self.e_h, self.q_h, self.eps_h, self.identity_residual
        )
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 9 {
            return Err(Error::parse(0, format!("expected 9 fields, found {}", f.len())));
        }
        let num = |i: usize| -> Result<f64> { f[i].parse().map_err(|_| Error::parse(0, format!("bad number `{}`", f[i]))) };
        Ok(Self {
            h: num(0)?,
            dt: num(1)?,
            xi: num(2)?,
            mesh: f[3].to_string(),
            l1_error: num(4)?,
            e_h: num(5)?,
            q_h: num(6)?,
            eps_h: num(7)?,
            identity_residual: num(8)?,
        })
    }
}

/// Rows sorted by decreasing `h`, with the fitted slope when there are at
/// least two of them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub fit: Option<EocFit>,
}

impl ConvergenceTable {
    pub fn new(mut rows: Vec<ConvergenceRow>) -> Result<Self> {
        rows.sort_by(|a, b| b.h.total_cmp(&a.h));
        let fit = if rows.len() >= 2 {
            Some(estimate_eoc(&rows.iter().map(|r| (r.h, r.l1_error)).collect::<Vec<_>>())?)
        } else {
            None
        };
        Ok(Self { rows, fit })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CONVERGENCE_HEADER}")?;
        for r in &self.rows {
            writeln!(out, "{}", r.to_csv())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty table"))?
            .map_err(|e| Error::parse(1, e.to_string()))?;
        if header.trim() != CONVERGENCE_HEADER {
            return Err(Error::parse(1, format!("unexpected header `{header}`")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::parse(i + 2, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            rows.push(ConvergenceRow::from_csv(&line).map_err(|e| match e {
                Error::Parse { message, .. } => Error::parse(i + 2, message),
                other => other,
            })?);
        }
        Self::new(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_half_order() {
        let fit = estimate_eoc(&[(0.1, 0.04), (0.05, 0.028284)]).unwrap();
        assert!((fit.slope - 0.50001384).abs() < 1e-8);
        assert!(fit.residual < 1e-12);
        let exact = estimate_eoc(&[(0.1, 0.04), (0.05, 0.04 / 2f64.sqrt())]).unwrap();
        assert!((exact.slope - 0.5).abs() < 1e-14);
    }

    #[test]
    fn equal_errors_give_zero() {
        assert!(estimate_eoc(&[(0.1, 0.3), (0.05, 0.3)]).unwrap().slope.abs() < 1e-15);
    }

    #[test]
    fn three_point_regression() {
        // Independent closed-form regression on the three points.
        let fit = estimate_eoc(&[(0.1, 4e-2), (0.05, 2.9e-2), (0.025, 2.05e-2)]).unwrap();
        assert!((fit.slope - 0.48218804513463925).abs() < 1e-12);
        assert!(fit.residual > 0.0);
    }

    #[test]
    fn invalid_rows() {
        assert!(estimate_eoc(&[(0.1, 0.1)]).is_err());
        assert!(estimate_eoc(&[(0.1, 0.1), (0.05, 0.0)]).is_err());
        assert!(estimate_eoc(&[(0.1, 0.1), (0.1, 0.05)]).is_err());
        assert!(estimate_eoc(&[(-0.1, 0.1), (0.1, 0.05)]).is_err());
    }

    #[test]
    fn table_round_trip() {
        let rows: Vec<ConvergenceRow> = [0.05, 0.2, 0.1]
            .iter()
            .map(|&h| ConvergenceRow {
                h,
                dt: h / 3.0,
                xi: 0.1,
                mesh: "cartesian".into(),
                l1_error: h.sqrt() * 0.123456789,
                e_h: 1.0 / 7.0,
                q_h: std::f64::consts::PI * h,
                eps_h: 1e-300,
                identity_residual: 2.0e-17,
            })
            .collect();
        let table = ConvergenceTable::new(rows).unwrap();
        assert_eq!(table.rows.iter().map(|r| r.h).collect::<Vec<_>>(), vec![0.2, 0.1, 0.05]);
        assert!((table.fit.unwrap().slope - 0.5).abs() < 1e-14);
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = ConvergenceTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, table);
        assert!(ConvergenceTable::read_csv("h,dt\n".as_bytes()).is_err());
    }
}
