use super::{BoundaryKind, Mesh};
use crate::geometry::{self, Vec2};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

/// Mesh size and the tightest admissible uniformity constant `alpha`, i.e.
/// the largest value with `alpha h^2 <= |K|` and `|∂K| <= h / alpha` for
/// every cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub h: f64,
    pub alpha: f64,
    pub min_area: f64,
    pub max_perimeter: f64,
}

const GEOMETRY_TOL: f64 = 1e-12;

/// Checks structural and geometric consistency and measures regularity.
pub fn validate_mesh(mesh: &Mesh) -> Result<RegularityReport> {
    let periodic = mesh.boundary == BoundaryKind::Periodic;
    let scale = mesh.domain.size();

    for cell in &mesh.cells {
        let pts = mesh.cell_points(cell.id);
        let shoelace = geometry::signed_area(&pts);
        if !(shoelace > 0.0) || !(cell.area > 0.0) {
            return Err(Error::validation(format!(
                "cell {} is inverted or degenerate (area {:e})",
                cell.id, shoelace
            )));
        }
        if (cell.area - shoelace).abs() > 1e-13 * shoelace {
            return Err(Error::validation(format!(
                "cell {} stores area {:e} but its vertex loop gives {:e}",
                cell.id, cell.area, shoelace
            )));
        }
        if cell.edges.len() != cell.vertex_loop.len() {
            return Err(Error::validation(format!(
                "cell {} has {} vertices but references {} edges",
                cell.id,
                cell.vertex_loop.len(),
                cell.edges.len()
            )));
        }
        let mut closure = Vec2::ZERO;
        for ce in &cell.edges {
            let e = mesh
                .edges
                .get(ce.edge)
                .ok_or_else(|| Error::validation(format!("cell {} references missing edge {}", cell.id, ce.edge)))?;
            let consistent = if ce.sign > 0.0 {
                e.left == cell.id
            } else {
                e.right == Some(cell.id)
            };
            if !consistent {
                return Err(Error::validation(format!(
                    "cell {} references edge {} with the wrong orientation",
                    cell.id, ce.edge
                )));
            }
            closure += e.normal * (ce.sign * e.length);
        }
        if closure.norm() > GEOMETRY_TOL * cell.perimeter.max(1.0) {
            return Err(Error::validation(format!(
                "cell {} is not closed: sum of length * normal = ({:e}, {:e})",
                cell.id, closure.x, closure.y
            )));
        }
    }

    let mut refs = vec![(0usize, 0usize); mesh.edges.len()];
    for cell in &mesh.cells {
        for ce in &cell.edges {
            if ce.sign > 0.0 {
                refs[ce.edge].0 += 1;
            } else {
                refs[ce.edge].1 += 1;
            }
        }
    }

    for e in &mesh.edges {
        let (a, b) = mesh.edge_points(e.id);
        if (e.length - (b - a).norm()).abs() > 1e-14 * scale.max(1.0) || (e.normal.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::validation(format!("edge {} has inconsistent length or normal", e.id)));
        }
        if !loop_has_segment(mesh, e.left, a, b, false) {
            return Err(Error::validation(format!(
                "edge {} is not a side of its left cell {}",
                e.id, e.left
            )));
        }
        match e.right {
            Some(r) => {
                if refs[e.id] != (1, 1) {
                    return Err(Error::validation(format!(
                        "interior edge {} is referenced {:?} times (expected once per side)",
                        e.id, refs[e.id]
                    )));
                }
                if !loop_has_segment(mesh, r, b, a, periodic) {
                    return Err(Error::validation(format!(
                        "interior edge {} is unpaired: no matching side in right cell {}",
                        e.id, r
                    )));
                }
            }
            None => {
                if periodic {
                    return Err(Error::validation(format!(
                        "edge {} has no right cell in a periodic mesh",
                        e.id
                    )));
                }
                if refs[e.id] != (1, 0) {
                    return Err(Error::validation(format!(
                        "boundary edge {} is referenced {:?} times",
                        e.id, refs[e.id]
                    )));
                }
                if !on_domain_boundary(mesh, a) || !on_domain_boundary(mesh, b) {
                    return Err(Error::validation(format!(
                        "boundary edge {} does not lie on the domain boundary",
                        e.id
                    )));
                }
            }
        }
    }

    let mut area = CompensatedSum::new();
    for c in &mesh.cells {
        area.add(c.area);
    }
    let domain_area = mesh.domain.area();
    if (area.value() - domain_area).abs() > GEOMETRY_TOL * domain_area {
        return Err(Error::validation(format!(
            "cell areas sum to {:.17} but the domain area is {:.17}",
            area.value(),
            domain_area
        )));
    }

    let h = mesh.mesh_size();
    let min_area = mesh.cells.iter().map(|c| c.area).fold(f64::INFINITY, f64::min);
    let max_perimeter = mesh.cells.iter().map(|c| c.perimeter).fold(0.0, f64::max);
    let alpha = mesh
        .cells
        .iter()
        .map(|c| (c.area / (h * h)).min(h / c.perimeter))
        .fold(f64::INFINITY, f64::min);
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::validation(format!("uniformity constant alpha = {alpha:e} is not positive")));
    }
    Ok(RegularityReport {
        h,
        alpha,
        min_area,
        max_perimeter,
    })
}

fn on_domain_boundary(mesh: &Mesh, p: Vec2) -> bool {
    let d = &mesh.domain;
    let tol = GEOMETRY_TOL * d.size();
    (p.x - d.min.x).abs() <= tol || (p.x - d.max.x).abs() <= tol || (p.y - d.min.y).abs() <= tol || (p.y - d.max.y).abs() <= tol
}

/// Whether the loop of `cell` contains the side `a -> b`, possibly as a
/// periodic translate.
fn loop_has_segment(mesh: &Mesh, cell: usize, a: Vec2, b: Vec2, periodic: bool) -> bool {
    let pts = mesh.cell_points(cell);
    let n = pts.len();
    let tol = GEOMETRY_TOL * mesh.domain.size();
    let (w, h) = (mesh.domain.width(), mesh.domain.height());
    (0..n).any(|k| {
        let p = pts[k];
        let q = pts[(k + 1) % n];
        let shift = p - a;
        if ((q - b) - shift).norm() > tol {
            return false;
        }
        if !periodic {
            return shift.norm() <= tol;
        }
        let kx = (shift.x / w).round();
        let ky = (shift.y / h).round();
        (shift.x - kx * w).abs() <= tol && (shift.y - ky * h).abs() <= tol
    })
}
