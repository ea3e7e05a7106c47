//! Plain-text mesh format.
//!
//! ```text
//! mesh2d v1 <nvertices> <nedges> <ncells> <impermeable|periodic>
//! v <x> <y>
//! e <v0> <v1> <left> <right|-1>
//! c <k> <v0> <v1> ... <v(k-1)>
//! ```
//!
//! Reals are written with 17 significant digits so a round trip is exact.
//! The domain is the bounding box of the vertices.

use std::io::{BufRead, Write};

use super::{BoundaryKind, DomainBox, EdgeSpec, Mesh};
use crate::geometry::Vec2;
use crate::{Error, Result};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "mesh2d v1 {} {} {} {}",
        mesh.vertices.len(),
        mesh.edges.len(),
        mesh.cells.len(),
        mesh.boundary.as_str()
    )?;
    for v in &mesh.vertices {
        writeln!(out, "v {:.16e} {:.16e}", v.position.x, v.position.y)?;
    }
    for e in &mesh.edges {
        let right = e.right.map_or(-1, |r| r as i64);
        writeln!(out, "e {} {} {} {}", e.endpoints[0], e.endpoints[1], e.left, right)?;
    }
    for c in &mesh.cells {
        write!(out, "c {}", c.vertex_loop.len())?;
        for v in &c.vertex_loop {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut lines = input.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });

    let (line_no, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let header = header.map_err(|e| Error::parse(line_no, e.to_string()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 || h[0] != "mesh2d" || h[1] != "v1" {
        return Err(Error::parse(line_no, format!("bad header `{header}`")));
    }
    let nv: usize = parse(h[2], line_no)?;
    let ne: usize = parse(h[3], line_no)?;
    let nc: usize = parse(h[4], line_no)?;
    let boundary: BoundaryKind = h[5].parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;

    let mut positions = Vec::with_capacity(nv);
    let mut edges = Vec::with_capacity(ne);
    let mut loops = Vec::with_capacity(nc);
    for (line_no, line) in lines {
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok[0] {
            "v" if tok.len() == 3 => positions.push(Vec2::new(parse(tok[1], line_no)?, parse(tok[2], line_no)?)),
            "e" if tok.len() == 5 => {
                let right: i64 = parse(tok[4], line_no)?;
                edges.push(EdgeSpec {
                    v0: parse(tok[1], line_no)?,
                    v1: parse(tok[2], line_no)?,
                    left: parse(tok[3], line_no)?,
                    right: if right < 0 { None } else { Some(right as usize) },
                });
            }
            "c" if tok.len() >= 2 => {
                let k: usize = parse(tok[1], line_no)?;
                if tok.len() != k + 2 {
                    return Err(Error::parse(line_no, format!("cell declares {k} vertices")));
                }
                loops.push(tok[2..].iter().map(|t| parse(t, line_no)).collect::<Result<Vec<usize>>>()?);
            }
            _ => return Err(Error::parse(line_no, format!("unrecognized record `{line}`"))),
        }
    }
    if positions.len() != nv || edges.len() != ne || loops.len() != nc {
        return Err(Error::parse(
            0,
            format!(
                "header announces {nv}/{ne}/{nc} vertices/edges/cells, found {}/{}/{}",
                positions.len(),
                edges.len(),
                loops.len()
            ),
        ));
    }
    let lo = positions
        .iter()
        .fold(Vec2::new(f64::INFINITY, f64::INFINITY), |a, p| Vec2::new(a.x.min(p.x), a.y.min(p.y)));
    let hi = positions.iter().fold(Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY), |a, p| {
        Vec2::new(a.x.max(p.x), a.y.max(p.y))
    });
    let domain = DomainBox::new(lo, hi)?;
    Mesh::from_parts(positions, loops, edges, domain, boundary)
}

fn parse<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::parse(line, format!("cannot parse `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_perturbed_cartesian, validate_mesh};

    #[test]
    fn round_trip_is_exact() {
        for boundary in [BoundaryKind::Impermeable, BoundaryKind::Periodic] {
            let m = build_perturbed_cartesian(5, 3, DomainBox::unit(), boundary, 0.3, 11).unwrap();
            let mut buf = Vec::new();
            write_mesh(&m, &mut buf).unwrap();
            let back = read_mesh(buf.as_slice()).unwrap();
            assert_eq!(back, m);
            validate_mesh(&back).unwrap();
        }
    }

    #[test]
    fn header_format() {
        let m = crate::mesh::build_cartesian(1, 1, DomainBox::unit(), BoundaryKind::Impermeable).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("mesh2d v1 4 4 1 impermeable"));
        assert_eq!(lines.next(), Some("v 0.0000000000000000e0 0.0000000000000000e0"));
        assert!(text.contains("\ne 2 0 0 -1\n"));
        assert!(text.ends_with("c 4 0 1 3 2\n"));
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_mesh("mesh2d v2 0 0 0 periodic\n".as_bytes()).is_err());
        assert!(read_mesh("mesh2d v1 1 0 0 periodic\nv 0 x\n".as_bytes()).is_err());
        assert!(read_mesh("mesh2d v1 0 0 0 periodic\nq 1\n".as_bytes()).is_err());
    }
}
