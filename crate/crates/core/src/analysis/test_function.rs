//! Smoothed signed indicator of a polygon union, transported by the flow.
//!
//! `φ0(x) = ±Γ(d(x, ∂A) / √(t h))` with the sign of `x ∈ A`, where `Γ` is a
//! C^∞ ramp equal to 0 below 1/3 and 1 above 2/3. The space-time function
//! `φ(x, s) = φ0(X(x, s)) ψ(s)` is constant along characteristics up to the
//! temporal cutoff `ψ`, which drops smoothly from 1 to 0 on `[t, t + w]`.

use crate::characteristics::{backward_flow, FlowSampler};
use crate::flow::VelocityField;
use crate::geometry::{self, Vec2};
use crate::{Error, Result};

use super::weak::TestFunction;

fn f(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn df(s: f64) -> f64 {
    if s > 0.0 {
        f(s) / (s * s)
    } else {
        0.0
    }
}

/// `S(x) = f(x) / (f(x) + f(1 - x))` with `f(s) = exp(-1/s)`: 0 for
/// `x <= 0`, 1 for `x >= 1`, C^∞ in between.
pub fn smoothstep(x: f64) -> f64 {
    let (a, b) = (f(x), f(1.0 - x));
    a / (a + b)
}

pub fn smoothstep_derivative(x: f64) -> f64 {
    let (a, b) = (f(x), f(1.0 - x));
    (df(x) * b + a * df(1.0 - x)) / ((a + b) * (a + b))
}

/// `Γ(R) = S(3R - 1)`.
pub fn ramp(r: f64) -> f64 {
    smoothstep(3.0 * r - 1.0)
}

pub fn ramp_derivative(r: f64) -> f64 {
    3.0 * smoothstep_derivative(3.0 * r - 1.0)
}

/// `sup |Γ'| = 3 S'(1/2) = 6`.
pub const RAMP_DERIVATIVE_SUP: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ProofTestFunction {
    pub polygons: Vec<Vec<Vec2>>,
    pub sampler: FlowSampler,
    pub t: f64,
    pub h: f64,
    /// Width of the temporal cutoff after `t`.
    pub cutoff_width: f64,
}

/// Builds `φ` for the region `A` given as a union of simple polygons.
pub fn build_proof_test_function(polygons: Vec<Vec<Vec2>>, sampler: FlowSampler, t: f64, h: f64, cutoff_width: f64) -> Result<ProofTestFunction> {
    if !(t * h > 0.0) || !(t * h).is_finite() {
        return Err(Error::invalid(format!("t h must be positive, got t = {t}, h = {h}")));
    }
    if !(cutoff_width > 0.0) {
        return Err(Error::invalid("temporal cutoff width must be positive"));
    }
    crate::scheme::InitialData::indicator(polygons.clone()).validate(&sampler.domain)?;
    Ok(ProofTestFunction {
        polygons,
        sampler,
        t,
        h,
        cutoff_width,
    })
}

impl ProofTestFunction {
    pub fn length_scale(&self) -> f64 {
        (self.t * self.h).sqrt()
    }

    /// Bound `sup|Γ'| / √(t h)` on the gradient of `φ0`.
    pub fn gradient_bound(&self) -> f64 {
        RAMP_DERIVATIVE_SUP / self.length_scale()
    }

    pub fn phi0(&self, x: Vec2) -> f64 {
        let d = self
            .polygons
            .iter()
            .map(|p| geometry::distance_to_boundary(x, p))
            .fold(f64::INFINITY, f64::min);
        let g = ramp(d / self.length_scale());
        if self.polygons.iter().any(|p| geometry::point_in_polygon(x, p)) {
            g
        } else {
            -g
        }
    }

    /// Temporal cutoff `ψ(s)` and its derivative.
    pub fn cutoff(&self, s: f64) -> (f64, f64) {
        let r = (s - self.t) / self.cutoff_width;
        (1.0 - smoothstep(r), -smoothstep_derivative(r) / self.cutoff_width)
    }
}

impl TestFunction for ProofTestFunction {
    fn value(&self, x: Vec2, s: f64) -> f64 {
        let (psi, _) = self.cutoff(s);
        if psi == 0.0 {
            return 0.0;
        }
        self.phi0(backward_flow(&self.sampler, x, s)) * psi
    }

    fn gradient(&self, x: Vec2, s: f64) -> Vec2 {
        let e = 1e-7 * self.sampler.domain.size();
        let dx = Vec2::new(e, 0.0);
        let dy = Vec2::new(0.0, e);
        Vec2::new(
            (self.value(x + dx, s) - self.value(x - dx, s)) / (2.0 * e),
            (self.value(x + dy, s) - self.value(x - dy, s)) / (2.0 * e),
        )
    }

    fn time_derivative(&self, x: Vec2, s: f64) -> f64 {
        let e = 1e-7 * self.cutoff_width.min(1.0);
        (self.value(x, s + e) - self.value(x, s - e)) / (2.0 * e)
    }

    /// `φ0(X(x, s))` is constant along characteristics, leaving `φ0 ψ'`.
    fn transport_derivative(&self, x: Vec2, s: f64, _field: &VelocityField) -> f64 {
        let (_, dpsi) = self.cutoff(s);
        if dpsi == 0.0 {
            return 0.0;
        }
        self.phi0(backward_flow(&self.sampler, x, s)) * dpsi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryKind, DomainBox};

    fn square() -> Vec<Vec2> {
        vec![Vec2::new(0.3, 0.3), Vec2::new(0.7, 0.3), Vec2::new(0.7, 0.7), Vec2::new(0.3, 0.7)]
    }

    fn sampler() -> FlowSampler {
        FlowSampler::new(VelocityField::cellular(1.0), DomainBox::unit(), BoundaryKind::Impermeable)
    }

    #[test]
    fn ramp_shape() {
        assert_eq!(ramp(0.0), 0.0);
        assert_eq!(ramp(1.0 / 3.0), 0.0);
        assert_eq!(ramp(2.0 / 3.0), 1.0);
        assert_eq!(ramp(5.0), 1.0);
        assert!((ramp(0.5) - 0.5).abs() < 1e-15);
        assert!((ramp_derivative(0.5) - RAMP_DERIVATIVE_SUP).abs() < 1e-12);
        let sup = (0..=10000).map(|i| ramp_derivative(i as f64 / 10000.0)).fold(0.0, f64::max);
        assert!(sup <= RAMP_DERIVATIVE_SUP * (1.0 + 1e-12));
        for i in 1..100 {
            let r = i as f64 / 100.0;
            let fd = (ramp(r + 1e-7) - ramp(r - 1e-7)) / 2e-7;
            assert!((fd - ramp_derivative(r)).abs() < 1e-5);
            assert!(ramp_derivative(r) >= 0.0);
        }
    }

    #[test]
    fn plateaus_inside_and_outside() {
        let phi = build_proof_test_function(vec![square()], sampler(), 0.1, 0.01, 0.01).unwrap();
        let ell = phi.length_scale();
        assert!((ell - 0.1f64.sqrt() * 0.1).abs() < 1e-15);
        assert_eq!(phi.phi0(Vec2::new(0.5, 0.5)), 1.0);
        assert_eq!(phi.phi0(Vec2::new(0.3 - ell * 0.7, 0.5)), -1.0);
        assert_eq!(phi.phi0(Vec2::new(0.3 + ell * 0.2, 0.5)), 0.0);
    }

    #[test]
    fn gradient_is_bounded() {
        let phi = build_proof_test_function(vec![square()], sampler(), 0.2, 0.02, 0.01).unwrap();
        let e = 1e-7;
        let mut worst: f64 = 0.0;
        let n = 400;
        for j in 0..n {
            for i in 0..n {
                let p = Vec2::new(0.2 + 0.6 * (i as f64 + 0.5) / n as f64, 0.2 + 0.6 * (j as f64 + 0.5) / n as f64);
                let gx = (phi.phi0(p + Vec2::new(e, 0.0)) - phi.phi0(p - Vec2::new(e, 0.0))) / (2.0 * e);
                let gy = (phi.phi0(p + Vec2::new(0.0, e)) - phi.phi0(p - Vec2::new(0.0, e))) / (2.0 * e);
                worst = worst.max(gx.hypot(gy));
            }
        }
        assert!(worst > 0.5 * phi.gradient_bound());
        assert!(worst <= 1.05 * phi.gradient_bound(), "{worst} vs {}", phi.gradient_bound());
    }

    #[test]
    fn transported_and_cut_off() {
        let phi = build_proof_test_function(vec![square()], sampler(), 0.3, 0.05, 0.02).unwrap();
        let x0 = Vec2::new(0.45, 0.4);
        let y = crate::characteristics::forward_flow(&phi.sampler, x0, 0.2);
        assert!((phi.value(y, 0.2) - phi.phi0(x0)).abs() < 1e-9);
        assert_eq!(phi.value(y, 0.33), 0.0);
        assert_eq!(phi.cutoff(0.1), (1.0, 0.0));
        // Along characteristics only the cutoff varies.
        let fd = phi.time_derivative(y, 0.2) + phi.sampler.field.velocity_at(y, 0.2).dot(phi.gradient(y, 0.2));
        assert!(fd.abs() < 1e-5, "{fd}");
        assert_eq!(phi.transport_derivative(y, 0.2, &phi.sampler.field), 0.0);
    }

    #[test]
    fn rejects_degenerate_scale() {
        assert!(build_proof_test_function(vec![square()], sampler(), 0.0, 0.1, 0.01).is_err());
        assert!(build_proof_test_function(vec![square()], sampler(), 0.1, -0.1, 0.01).is_err());
    }
}
