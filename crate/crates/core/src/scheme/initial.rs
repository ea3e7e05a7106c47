use crate::geometry::{self, Vec2};
use crate::mesh::{DomainBox, Mesh};
use crate::quadrature::{polygon_rule, CellRuleKind};
use crate::{Error, Result};

/// Closed-form initial profiles that are projected by sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticProfile {
    Constant { value: f64 },
    /// `A exp(-|x - c|^2 / (2 w^2))`.
    Gaussian { center: Vec2, width: f64, amplitude: f64 },
    /// `A cos^2(π r / 2R)` for `r < R`, zero outside.
    CosineHill { center: Vec2, radius: f64, amplitude: f64 },
}

impl AnalyticProfile {
    pub fn value(&self, p: Vec2) -> f64 {
        match *self {
            AnalyticProfile::Constant { value } => value,
            AnalyticProfile::Gaussian { center, width, amplitude } => {
                let r2 = (p - center).dot(p - center);
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            AnalyticProfile::CosineHill { center, radius, amplitude } => {
                let r = (p - center).norm();
                if r >= radius {
                    0.0
                } else {
                    let c = (std::f64::consts::FRAC_PI_2 * r / radius).cos();
                    amplitude * c * c
                }
            }
        }
    }
}

/// Uniform auxiliary grid carrying piecewise-constant data.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxGrid {
    pub nx: usize,
    pub ny: usize,
    pub domain: DomainBox,
}

impl AuxGrid {
    pub fn cell_rect(&self, i: usize, j: usize) -> [Vec2; 4] {
        let dx = self.domain.width() / self.nx as f64;
        let dy = self.domain.height() / self.ny as f64;
        let x0 = self.domain.min.x + i as f64 * dx;
        let y0 = self.domain.min.y + j as f64 * dy;
        let x1 = if i + 1 == self.nx { self.domain.max.x } else { x0 + dx };
        let y1 = if j + 1 == self.ny { self.domain.max.y } else { y0 + dy };
        [Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)]
    }

    /// Row-major index of the cell containing `p`, if any.
    pub fn locate(&self, p: Vec2) -> Option<usize> {
        if !self.domain.contains(p, 0.0) {
            return None;
        }
        let fx = (p.x - self.domain.min.x) / self.domain.width() * self.nx as f64;
        let fy = (p.y - self.domain.min.y) / self.domain.height() * self.ny as f64;
        let i = (fx.floor() as usize).min(self.nx - 1);
        let j = (fy.floor() as usize).min(self.ny - 1);
        Some(j * self.nx + i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Indicator of a union of pairwise disjoint simple polygons.
    Indicator { polygons: Vec<Vec<Vec2>> },
    /// Row-major values on an auxiliary cartesian grid; zero outside it.
    PiecewiseConstant { grid: AuxGrid, values: Vec<f64> },
    Analytic(AnalyticProfile),
}

impl InitialData {
    pub fn indicator(polygons: Vec<Vec<Vec2>>) -> Self {
        InitialData::Indicator { polygons }
    }

    /// Indicator of the axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        InitialData::Indicator {
            polygons: vec![vec![
                Vec2::new(x0, y0),
                Vec2::new(x1, y0),
                Vec2::new(x1, y1),
                Vec2::new(x0, y1),
            ]],
        }
    }

    pub fn value(&self, p: Vec2) -> f64 {
        match self {
            InitialData::Indicator { polygons } => {
                if polygons.iter().any(|poly| geometry::point_in_polygon(p, poly)) {
                    1.0
                } else {
                    0.0
                }
            }
            InitialData::PiecewiseConstant { grid, values } => grid.locate(p).map_or(0.0, |k| values[k]),
            InitialData::Analytic(profile) => profile.value(p),
        }
    }

    /// Checks the data against the domain it is used on.
    pub fn validate(&self, domain: &DomainBox) -> Result<()> {
        let tol = 1e-12 * domain.size();
        match self {
            InitialData::Indicator { polygons } => {
                for (i, poly) in polygons.iter().enumerate() {
                    if poly.len() < 3 || poly.iter().any(|p| !p.is_finite()) {
                        return Err(Error::invalid(format!("polygon {i} needs at least 3 finite vertices")));
                    }
                    if let Some(p) = poly.iter().find(|p| !domain.contains(**p, tol)) {
                        return Err(Error::invalid(format!(
                            "polygon {i} has vertex ({}, {}) outside the domain",
                            p.x, p.y
                        )));
                    }
                    if !geometry::is_simple(poly) || geometry::signed_area(poly) == 0.0 {
                        return Err(Error::invalid(format!("polygon {i} is not simple")));
                    }
                }
                for i in 0..polygons.len() {
                    for j in i + 1..polygons.len() {
                        if polygons_overlap(&polygons[i], &polygons[j]) {
                            return Err(Error::invalid(format!("polygons {i} and {j} overlap")));
                        }
                    }
                }
                Ok(())
            }
            InitialData::PiecewiseConstant { grid, values } => {
                if grid.nx == 0 || grid.ny == 0 || values.len() != grid.nx * grid.ny {
                    return Err(Error::invalid("auxiliary grid size does not match its values"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("piecewise-constant data has non-finite values"));
                }
                if !domain.contains(grid.domain.min, tol) || !domain.contains(grid.domain.max, tol) {
                    return Err(Error::invalid("auxiliary grid extends outside the domain"));
                }
                Ok(())
            }
            InitialData::Analytic(_) => Ok(()),
        }
    }
}

fn polygons_overlap(a: &[Vec2], b: &[Vec2]) -> bool {
    let n = a.len();
    let m = b.len();
    for i in 0..n {
        for j in 0..m {
            if segments_cross(a[i], a[(i + 1) % n], b[j], b[(j + 1) % m]) {
                return true;
            }
        }
    }
    // Containment without crossing edges; touching boundaries are allowed.
    let strictly_inside = |p: Vec2, poly: &[Vec2]| {
        geometry::point_in_polygon(p, poly) && geometry::distance_to_boundary(p, poly) > 0.0
    };
    a.iter().any(|&p| strictly_inside(p, b)) || b.iter().any(|&p| strictly_inside(p, a))
        || geometry::intersection_area(a, b) > 1e-14 * geometry::signed_area(a).abs().min(geometry::signed_area(b).abs())
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// How initial data is averaged over cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMode {
    /// Exact polygon clipping for indicator and piecewise-constant data.
    ExactClip,
    /// `k^2` midpoint samples per cell for every kind of data.
    Sampled(usize),
}

pub(crate) fn project(mesh: &Mesh, data: &InitialData, mode: ProjectionMode, analytic_density: usize) -> Result<Vec<f64>> {
    data.validate(&mesh.domain)?;
    use rayon::prelude::*;
    let sampled = |k: usize| -> Result<Vec<f64>> {
        if k == 0 {
            return Err(Error::invalid("sample density must be positive"));
        }
        Ok((0..mesh.num_cells())
            .into_par_iter()
            .map(|c| {
                let rule = polygon_rule(&mesh.cell_points(c), CellRuleKind::Midpoint(k));
                let s: f64 = rule.iter().map(|&(p, w)| w * data.value(p)).sum();
                s / mesh.cells[c].area
            })
            .collect())
    };
    match (data, mode) {
        (InitialData::Analytic(_), ProjectionMode::ExactClip) => sampled(analytic_density),
        (_, ProjectionMode::Sampled(k)) => sampled(k),
        (InitialData::Indicator { polygons }, ProjectionMode::ExactClip) => {
            let bounds: Vec<(Vec2, Vec2)> = polygons.iter().map(|p| bbox(p)).collect();
            Ok((0..mesh.num_cells())
                .into_par_iter()
                .map(|c| {
                    let cell = mesh.cell_points(c);
                    let (lo, hi) = mesh.cell_bounds(c);
                    let covered: f64 = polygons
                        .iter()
                        .zip(&bounds)
                        .filter(|(_, (plo, phi))| plo.x < hi.x && phi.x > lo.x && plo.y < hi.y && phi.y > lo.y)
                        .map(|(poly, _)| geometry::intersection_area(poly, &cell))
                        .sum();
                    covered / mesh.cells[c].area
                })
                .collect())
        }
        (InitialData::PiecewiseConstant { grid, values }, ProjectionMode::ExactClip) => Ok((0..mesh.num_cells())
            .into_par_iter()
            .map(|c| {
                let cell = mesh.cell_points(c);
                let (lo, hi) = mesh.cell_bounds(c);
                let dx = grid.domain.width() / grid.nx as f64;
                let dy = grid.domain.height() / grid.ny as f64;
                let range = |lo: f64, hi: f64, origin: f64, d: f64, n: usize| {
                    let a = ((lo - origin) / d).floor().max(0.0) as usize;
                    let b = (((hi - origin) / d).ceil().max(0.0) as usize).min(n);
                    a..b
                };
                let mut s = 0.0;
                for j in range(lo.y, hi.y, grid.domain.min.y, dy, grid.ny) {
                    for i in range(lo.x, hi.x, grid.domain.min.x, dx, grid.nx) {
                        let v = values[j * grid.nx + i];
                        if v != 0.0 {
                            s += v * geometry::intersection_area(&grid.cell_rect(i, j), &cell);
                        }
                    }
                }
                s / mesh.cells[c].area
            })
            .collect()),
    }
}

fn bbox(points: &[Vec2]) -> (Vec2, Vec2) {
    points.iter().fold(
        (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}
