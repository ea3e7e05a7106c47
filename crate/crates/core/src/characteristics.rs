//! Characteristic flows of the velocity field and the exact solution
//! `u(x, t) = u0(X(x, t))`.
//!
//! `Z(τ; x, t)` solves `dZ/dτ = V(Z, τ)` with `Z(t; x, t) = x`. The backward
//! flow is `X(x, t) = Z(0; x, t)` and the forward flow `Y(·, t)` is its
//! inverse. Both are integrated with the classical fourth-order Runge-Kutta
//! method on a fixed grid of substeps, so results are reproducible.

use rayon::prelude::*;

use crate::flow::{StreamFunction, VelocityField};
use crate::geometry::Vec2;
use crate::mesh::{BoundaryKind, DomainBox};
use crate::scheme::InitialData;
use crate::{Error, Result};

/// Default length of one integration interval; each interval is split into
/// `substeps_per_dt` Runge-Kutta steps.
pub const DEFAULT_REFERENCE_DT: f64 = 0.05;
pub const DEFAULT_SUBSTEPS: usize = 16;
/// Finite-difference step of [`jacobian_check`] relative to the domain size.
pub const JACOBIAN_FD_FACTOR: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSampler {
    pub field: VelocityField,
    pub domain: DomainBox,
    pub boundary: BoundaryKind,
    pub reference_dt: f64,
    pub substeps_per_dt: usize,
}

impl FlowSampler {
    pub fn new(field: VelocityField, domain: DomainBox, boundary: BoundaryKind) -> Self {
        Self {
            field,
            domain,
            boundary,
            reference_dt: DEFAULT_REFERENCE_DT,
            substeps_per_dt: DEFAULT_SUBSTEPS,
        }
    }

    pub fn with_substeps(mut self, substeps_per_dt: usize) -> Result<Self> {
        if substeps_per_dt == 0 {
            return Err(Error::invalid("substeps per interval must be at least 1"));
        }
        self.substeps_per_dt = substeps_per_dt;
        Ok(self)
    }

    pub fn with_reference_dt(mut self, reference_dt: f64) -> Result<Self> {
        if !(reference_dt > 0.0) || !reference_dt.is_finite() {
            return Err(Error::invalid(format!("reference dt must be positive, got {reference_dt}")));
        }
        self.reference_dt = reference_dt;
        Ok(self)
    }

    /// Number of Runge-Kutta steps used over a time span of length `span`.
    pub fn substep_count(&self, span: f64) -> usize {
        if span == 0.0 {
            return 0;
        }
        (span.abs() / self.reference_dt).ceil().max(1.0) as usize * self.substeps_per_dt
    }

    /// Transports `x` along the flow from time `from` to time `to`.
    pub fn flow_between(&self, x: Vec2, from: f64, to: f64) -> Vec2 {
        if from == to {
            return x;
        }
        if let StreamFunction::Uniform { a, b } = self.field.stream {
            let shift = self.field.time.integral(to) - self.field.time.integral(from);
            return self.fold(x + Vec2::new(a, b) * shift);
        }
        let n = self.substep_count(to - from);
        let h = (to - from) / n as f64;
        let v = |p: Vec2, t: f64| self.field.velocity_at(p, t);
        let mut z = x;
        for i in 0..n {
            let t = from + i as f64 * h;
            let k1 = v(z, t);
            let k2 = v(z + k1 * (0.5 * h), t + 0.5 * h);
            let k3 = v(z + k2 * (0.5 * h), t + 0.5 * h);
            let k4 = v(z + k3 * h, t + h);
            z = self.fold(z + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0));
        }
        z
    }

    fn fold(&self, p: Vec2) -> Vec2 {
        match self.boundary {
            BoundaryKind::Periodic => self.domain.wrap(p),
            BoundaryKind::Impermeable => p,
        }
    }

    /// Difference `p - q` taken to the nearest periodic image.
    fn offset(&self, p: Vec2, q: Vec2) -> Vec2 {
        let d = p - q;
        match self.boundary {
            BoundaryKind::Impermeable => d,
            BoundaryKind::Periodic => {
                let (w, h) = (self.domain.width(), self.domain.height());
                Vec2::new(d.x - w * (d.x / w).round(), d.y - h * (d.y / h).round())
            }
        }
    }
}

/// `X(x, t)`: the foot at time 0 of the characteristic through `(x, t)`.
pub fn backward_flow(sampler: &FlowSampler, x: Vec2, t: f64) -> Vec2 {
    sampler.flow_between(x, t, 0.0)
}

/// `Y(x, t)`: the position at time `t` of the particle started at `x`.
pub fn forward_flow(sampler: &FlowSampler, x: Vec2, t: f64) -> Vec2 {
    sampler.flow_between(x, 0.0, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub data: InitialData,
    pub sampler: FlowSampler,
}

impl ExactSolution {
    pub fn new(data: InitialData, sampler: FlowSampler) -> Result<Self> {
        data.validate(&sampler.domain)?;
        Ok(Self { data, sampler })
    }

    pub fn eval(&self, x: Vec2, t: f64) -> f64 {
        self.data.value(backward_flow(&self.sampler, x, t))
    }
}

pub fn exact_solution_at(sol: &ExactSolution, x: Vec2, t: f64) -> f64 {
    sol.eval(x, t)
}

/// Largest `|det ∇X(x, t) - 1|` over `points`, with `∇X` from central
/// differences of step `JACOBIAN_FD_FACTOR * domain size`.
pub fn jacobian_check(sampler: &FlowSampler, points: &[Vec2], t: f64) -> f64 {
    jacobian_check_with_step(sampler, points, t, JACOBIAN_FD_FACTOR * sampler.domain.size())
}

pub fn jacobian_check_with_step(sampler: &FlowSampler, points: &[Vec2], t: f64, step: f64) -> f64 {
    points
        .par_iter()
        .map(|&p| {
            let ex = Vec2::new(step, 0.0);
            let ey = Vec2::new(0.0, step);
            let dx = sampler.offset(backward_flow(sampler, p + ex, t), backward_flow(sampler, p - ex, t)) / (2.0 * step);
            let dy = sampler.offset(backward_flow(sampler, p + ey, t), backward_flow(sampler, p - ey, t)) / (2.0 * step);
            (dx.cross(dy) - 1.0).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// Observed order of the integrator from three runs with `n`, `2n` and `4n`
/// substeps over a single interval `[0, t]`:
/// `log2(|X_n - X_2n| / |X_2n - X_4n|)`.
pub fn richardson_order(sampler: &FlowSampler, x: Vec2, t: f64, n: usize) -> Result<f64> {
    let run = |k: usize| -> Result<Vec2> {
        let s = sampler.with_reference_dt(t)?.with_substeps(k)?;
        Ok(backward_flow(&s, x, t))
    };
    let (a, b, c) = (run(n)?, run(2 * n)?, run(4 * n)?);
    let coarse = sampler.offset(a, b).norm();
    let fine = sampler.offset(b, c).norm();
    if fine == 0.0 || coarse == 0.0 {
        return Err(Error::invalid("Richardson differences vanish; the flow is integrated exactly"));
    }
    Ok((coarse / fine).log2())
}
