//! Divergence-free velocity fields given by a stream function, and the
//! space-time averaged edge fluxes used by the scheme.
//!
//! With `V = g(t) (∂ψ/∂y, -∂ψ/∂x)`, the flux of `V` through a segment
//! `a -> b` (normal rotated clockwise from the tangent) is exactly
//! `g(t) (ψ(b) - ψ(a))`. Fluxes around a closed cell therefore telescope
//! to zero, which is what makes the scheme conservative.

use std::f64::consts::PI;

use crate::geometry::Vec2;
use crate::mesh::{BoundaryKind, DomainBox, Mesh};
use crate::quadrature::gauss_interval;
use crate::sum::CompensatedSum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StreamFunction {
    /// `ψ = a y - b x`, velocity `(a, b)`.
    Uniform { a: f64, b: f64 },
    /// `ψ = (A/π) sin(πx) sin(πy)`: counter-rotating cells of unit size.
    Cellular { amplitude: f64 },
}

impl StreamFunction {
    pub fn value(&self, p: Vec2) -> f64 {
        match *self {
            StreamFunction::Uniform { a, b } => a * p.y - b * p.x,
            StreamFunction::Cellular { amplitude } => amplitude / PI * (PI * p.x).sin() * (PI * p.y).sin(),
        }
    }

    /// `(∂ψ/∂y, -∂ψ/∂x)`.
    pub fn rotated_gradient(&self, p: Vec2) -> Vec2 {
        match *self {
            StreamFunction::Uniform { a, b } => Vec2::new(a, b),
            StreamFunction::Cellular { amplitude } => {
                let (sx, cx) = (PI * p.x).sin_cos();
                let (sy, cy) = (PI * p.y).sin_cos();
                Vec2::new(amplitude * sx * cy, -amplitude * cx * sy)
            }
        }
    }

    /// Upper bounds for `sup |V|` and `sup |∇V|` (operator norm) over the
    /// plane, for the spatial part only.
    pub fn lipschitz_bounds(&self) -> (f64, f64) {
        match *self {
            StreamFunction::Uniform { a, b } => (a.hypot(b), 0.0),
            // |V|^2 = A^2 (sx^2 cy^2 + cx^2 sy^2) <= A^2; ∇V has entries
            // ±Aπ (cx cy) and ∓Aπ (sx sy): operator norm Aπ.
            StreamFunction::Cellular { amplitude } => (amplitude.abs(), PI * amplitude.abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeFactor {
    Constant,
    /// `g(t) = cos(ω t)`.
    Cosine { omega: f64 },
}

impl TimeFactor {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeFactor::Constant => 1.0,
            TimeFactor::Cosine { omega } => (omega * t).cos(),
        }
    }

    /// `∫_0^t g`.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            TimeFactor::Constant => t,
            TimeFactor::Cosine { omega } if omega == 0.0 => t,
            TimeFactor::Cosine { omega } => (omega * t).sin() / omega,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        1.0
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeFactor::Constant) || matches!(self, TimeFactor::Cosine { omega } if *omega == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityField {
    pub stream: StreamFunction,
    pub time: TimeFactor,
}

impl VelocityField {
    pub fn new(stream: StreamFunction, time: TimeFactor) -> Self {
        Self { stream, time }
    }

    pub fn uniform(a: f64, b: f64) -> Self {
        Self::new(StreamFunction::Uniform { a, b }, TimeFactor::Constant)
    }

    pub fn cellular(amplitude: f64) -> Self {
        Self::new(StreamFunction::Cellular { amplitude }, TimeFactor::Constant)
    }

    pub fn with_time(mut self, time: TimeFactor) -> Self {
        self.time = time;
        self
    }

    pub fn velocity_at(&self, x: Vec2, t: f64) -> Vec2 {
        self.stream.rotated_gradient(x) * self.time.value(t)
    }

    /// `(sup |V|, sup |∇V|)` over space and time.
    pub fn w1inf_bounds(&self) -> (f64, f64) {
        let (v, dv) = self.stream.lipschitz_bounds();
        let g = self.time.sup_abs();
        (v * g, dv * g)
    }

    /// Whether the field is tangent to the boundary of `domain`, i.e. ψ is
    /// constant on it.
    pub fn is_tangent_to(&self, domain: &DomainBox) -> bool {
        match self.stream {
            StreamFunction::Uniform { a, b } => a == 0.0 && b == 0.0,
            StreamFunction::Cellular { amplitude } => {
                let integral = |v: f64| v.fract() == 0.0;
                amplitude == 0.0
                    || (integral(domain.min.x) && integral(domain.max.x) && integral(domain.min.y) && integral(domain.max.y))
            }
        }
    }

    /// Whether the velocity is continuous across the periodic identification
    /// of `domain`.
    pub fn is_periodic_on(&self, domain: &DomainBox) -> bool {
        match self.stream {
            StreamFunction::Uniform { .. } => true,
            StreamFunction::Cellular { amplitude } => {
                let even = |w: f64| (w / 2.0).fract() == 0.0;
                amplitude == 0.0 || (even(domain.width()) && even(domain.height()))
            }
        }
    }

    /// Checks that the field is admissible on a mesh with this boundary.
    pub fn check_compatible(&self, domain: &DomainBox, boundary: BoundaryKind) -> Result<()> {
        match boundary {
            BoundaryKind::Impermeable if !self.is_tangent_to(domain) => Err(Error::invalid(
                "velocity field is not tangent to the boundary of the impermeable domain; \
                 uniform fields require periodic boundaries",
            )),
            BoundaryKind::Periodic if !self.is_periodic_on(domain) => Err(Error::invalid(
                "velocity field is not periodic on this domain; cellular fields require \
                 impermeable boundaries on a box with integer corners",
            )),
            _ => Ok(()),
        }
    }
}

/// Signed fluxes `V_KL^n` for one time step, indexed by edge, oriented from
/// the edge's left cell to its right cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFluxes {
    pub step: usize,
    pub values: Vec<f64>,
}

impl EdgeFluxes {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Default number of Gauss points for the time average of `g`.
pub const TIME_QUADRATURE_POINTS: usize = 3;

/// Space-time fluxes for every step of a run with fixed `dt`. The spatial
/// part is computed once; each step scales it by the time average of `g`.
#[derive(Debug, Clone)]
pub struct FluxSchedule {
    field: VelocityField,
    dt: f64,
    time_points: usize,
    spatial: Vec<f64>,
}

impl FluxSchedule {
    pub fn new(mesh: &Mesh, field: &VelocityField, dt: f64) -> Result<Self> {
        Self::with_time_points(mesh, field, dt, TIME_QUADRATURE_POINTS)
    }

    pub fn with_time_points(mesh: &Mesh, field: &VelocityField, dt: f64, time_points: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if time_points == 0 {
            return Err(Error::invalid("time quadrature needs at least one point"));
        }
        Ok(Self {
            field: *field,
            dt,
            time_points,
            spatial: spatial_fluxes(mesh, field),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn field(&self) -> &VelocityField {
        &self.field
    }

    /// Per-edge `∫_{edge} (∂ψ/∂y, -∂ψ/∂x)·n`, before time modulation.
    pub fn spatial(&self) -> &[f64] {
        &self.spatial
    }

    /// Average of `g` over `[n dt, (n+1) dt]`.
    pub fn time_average(&self, n: usize) -> f64 {
        if self.field.time.is_constant() {
            return 1.0;
        }
        let t0 = n as f64 * self.dt;
        let rule = gauss_interval(self.time_points, t0, t0 + self.dt);
        rule.iter().map(|&(t, w)| w * self.field.time.value(t)).sum::<f64>() / self.dt
    }

    pub fn at_step(&self, n: usize) -> EdgeFluxes {
        let g = self.time_average(n);
        let values = if g == 1.0 {
            self.spatial.clone()
        } else {
            self.spatial.iter().map(|f| f * g).collect()
        };
        EdgeFluxes { step: n, values }
    }
}

fn spatial_fluxes(mesh: &Mesh, field: &VelocityField) -> Vec<f64> {
    let impermeable = mesh.boundary == BoundaryKind::Impermeable;
    mesh.edges
        .iter()
        .map(|e| {
            if impermeable && e.is_boundary() {
                return 0.0;
            }
            let (a, b) = mesh.edge_points(e.id);
            field.stream.value(b) - field.stream.value(a)
        })
        .collect()
}

/// Fluxes of step `n` for time step `dt`.
pub fn edge_time_flux(mesh: &Mesh, field: &VelocityField, n: usize, dt: f64) -> Result<EdgeFluxes> {
    Ok(FluxSchedule::new(mesh, field, dt)?.at_step(n))
}

/// Net outward flux of every cell.
pub fn discrete_divergence(mesh: &Mesh, fluxes: &EdgeFluxes) -> Vec<f64> {
    mesh.cells
        .iter()
        .map(|c| {
            let mut s = CompensatedSum::new();
            for ce in &c.edges {
                s.add(ce.sign * fluxes.values[ce.edge]);
            }
            s.value()
        })
        .collect()
}
