//! Snapshot text format: `gridfn v1 <ncells> <time>` followed by one value
//! per line, 17 significant digits.

use std::io::{BufRead, Write};

use super::GridFunction;
use crate::{Error, Result};

pub fn write_grid_function<W: Write>(u: &GridFunction, mut out: W) -> std::io::Result<()> {
    writeln!(out, "gridfn v1 {} {:.16e}", u.values.len(), u.time)?;
    for v in &u.values {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

/// Reads a snapshot; the step index is not stored and is set to zero.
pub fn read_grid_function<R: BufRead>(input: R) -> Result<GridFunction> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty input"))?
        .map_err(|e| Error::parse(1, e.to_string()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "gridfn" || h[1] != "v1" {
        return Err(Error::parse(1, format!("bad header `{header}`")));
    }
    let n: usize = h[2].parse().map_err(|_| Error::parse(1, "bad cell count"))?;
    let time: f64 = h[3].parse().map_err(|_| Error::parse(1, "bad time"))?;
    let mut values = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::parse(i + 2, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        values.push(line.trim().parse().map_err(|_| Error::parse(i + 2, format!("cannot parse `{line}`")))?);
    }
    if values.len() != n {
        return Err(Error::parse(0, format!("expected {n} values, found {}", values.len())));
    }
    Ok(GridFunction::new(values, 0, time))
}
