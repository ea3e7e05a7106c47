//! Discrete weak formulation.
//!
//! For a smooth test function `φ`, the piecewise-constant discrete solution
//! satisfies
//!
//! ```text
//! ∫∫ u_h (φ_t + V·∇φ) + ∫ u_h(0) φ(0) - ∫ u_h(T) φ(T) = μ_h + ν_h
//! μ_h = Σ_n Σ_K |K| (u_K^{n+1} - u_K^n) (⟨φ⟩_K^n - ⟨φ⟩_K((n+1)δt))
//! ν_h = Σ_n Σ_K Σ_L δt (u_L^n - u_K^n) (V_KL^n ⟨φ⟩_K^n - |K|L| ⟨V·n φ⟩_KL^n)
//! ```
//!
//! where `L` ranges over the inflow edges of `K`, `⟨φ⟩_K^n` is the
//! space-time average over `K x [nδt, (n+1)δt]` and `⟨V·n φ⟩_KL^n` the
//! space-time average over the edge with the normal pointing out of `K`.
//! The terminal term vanishes when `φ(·, T) = 0`. The identity is exact, so
//! the residual measures quadrature error only.
//!
//! Edges with zero flux are assigned to their left cell when regrouping the
//! edge integrals; the scheme does not depend on that choice.

use rayon::prelude::*;

use crate::flow::VelocityField;
use crate::geometry::Vec2;
use crate::mesh::Mesh;
use crate::quadrature::{gauss_interval, polygon_rule, segment_rule, CellRuleKind};
use crate::scheme::{GridFunction, StepObserver, StepView};
use crate::sum::{compensated_sum, CompensatedSum};
use crate::{Error, Result};

/// Smooth space-time test function.
pub trait TestFunction: Sync {
    fn value(&self, x: Vec2, t: f64) -> f64;
    fn gradient(&self, x: Vec2, t: f64) -> Vec2;
    fn time_derivative(&self, x: Vec2, t: f64) -> f64;

    /// `φ_t + V·∇φ`.
    fn transport_derivative(&self, x: Vec2, t: f64, field: &VelocityField) -> f64 {
        self.time_derivative(x, t) + field.velocity_at(x, t).dot(self.gradient(x, t))
    }
}

/// `A (1 + s·(x - c)) b(|x - c| / r) exp(λ t)` with the compactly supported
/// bump `b(ρ) = exp(1 - 1 / (1 - ρ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpTestFunction {
    pub center: Vec2,
    pub radius: f64,
    pub amplitude: f64,
    pub slope: Vec2,
    pub time_rate: f64,
}

impl BumpTestFunction {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Self {
            center,
            radius,
            amplitude: 1.0,
            slope: Vec2::ZERO,
            time_rate: 0.0,
        }
    }

    /// Bump value and its gradient.
    fn bump(&self, x: Vec2) -> (f64, Vec2) {
        let d = x - self.center;
        let r2 = self.radius * self.radius;
        let rho2 = d.dot(d) / r2;
        if rho2 >= 1.0 {
            return (0.0, Vec2::ZERO);
        }
        let one = 1.0 - rho2;
        let b = (1.0 - 1.0 / one).exp();
        (b, d * (-2.0 * b / (one * one * r2)))
    }
}

impl TestFunction for BumpTestFunction {
    fn value(&self, x: Vec2, t: f64) -> f64 {
        let (b, _) = self.bump(x);
        self.amplitude * (1.0 + self.slope.dot(x - self.center)) * b * (self.time_rate * t).exp()
    }

    fn gradient(&self, x: Vec2, t: f64) -> Vec2 {
        let (b, db) = self.bump(x);
        let p = 1.0 + self.slope.dot(x - self.center);
        (self.slope * b + db * p) * (self.amplitude * (self.time_rate * t).exp())
    }

    fn time_derivative(&self, x: Vec2, t: f64) -> f64 {
        self.time_rate * self.value(x, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakFormResidual {
    pub lhs: f64,
    pub mu: f64,
    pub nu: f64,
    /// `|lhs - (μ + ν)|`.
    pub residual: f64,
    /// Set when `φ` is nonzero at some quadrature point of a boundary edge
    /// of an impermeable mesh.
    pub support_touches_boundary: bool,
}

/// Step observer accumulating both sides of the weak formulation with
/// Gauss rules of order `q` in space, time and along edges.
pub struct WeakFormAccumulator<'a> {
    phi: &'a dyn TestFunction,
    field: VelocityField,
    q: usize,
    volume: CompensatedSum,
    mu: CompensatedSum,
    nu: CompensatedSum,
    initial: Option<f64>,
    terminal: f64,
    touches_boundary: bool,
}

impl<'a> WeakFormAccumulator<'a> {
    pub fn new(phi: &'a dyn TestFunction, field: VelocityField, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("quadrature order must be positive"));
        }
        Ok(Self {
            phi,
            field,
            q,
            volume: CompensatedSum::new(),
            mu: CompensatedSum::new(),
            nu: CompensatedSum::new(),
            initial: None,
            terminal: 0.0,
            touches_boundary: false,
        })
    }

    pub fn add_step(&mut self, mesh: &Mesh, fluxes: &[f64], dt: f64, before: &GridFunction, after: &GridFunction) {
        let t0 = before.step as f64 * dt;
        let t1 = t0 + dt;
        let time_rule = gauss_interval(self.q, t0, t1);
        let phi = self.phi;
        let field = &self.field;
        let q = self.q;
        let need_initial = self.initial.is_none();

        let per_cell: Vec<[f64; 6]> = (0..mesh.num_cells())
            .into_par_iter()
            .map(|k| {
                let cell = &mesh.cells[k];
                let rule = polygon_rule(&mesh.cell_points(k), CellRuleKind::Gauss(q));
                let mut transport = CompensatedSum::new();
                let mut space_time = CompensatedSum::new();
                for &(t, wt) in &time_rule {
                    for &(x, wx) in &rule {
                        transport.add(wt * wx * phi.transport_derivative(x, t, field));
                        space_time.add(wt * wx * phi.value(x, t));
                    }
                }
                let at = |t: f64| compensated_sum(rule.iter().map(|&(x, w)| w * phi.value(x, t)));
                let avg_n = space_time.value() / (cell.area * dt);
                let end_integral = at(t1);
                let start_integral = if need_initial { at(t0) } else { 0.0 };
                let uk = before.values[k];
                let mu = (after.values[k] - uk) * (cell.area * avg_n - end_integral);

                let mut nu = CompensatedSum::new();
                let mut boundary = 0.0f64;
                for ce in &cell.edges {
                    let edge = &mesh.edges[ce.edge];
                    let out = ce.sign * fluxes[ce.edge];
                    let (a, b) = mesh.edge_points(ce.edge);
                    let normal = edge.normal * ce.sign;
                    let Some(l) = edge.neighbor_of(k, ce.sign) else {
                        for &(t, _) in &time_rule {
                            for (x, _) in segment_rule(q, a, b) {
                                boundary = boundary.max(phi.value(x, t).abs());
                            }
                        }
                        continue;
                    };
                    let owner = out < 0.0 || (out == 0.0 && ce.sign > 0.0);
                    if !owner {
                        continue;
                    }
                    let mut edge_int = CompensatedSum::new();
                    for &(t, wt) in &time_rule {
                        for (x, wx) in segment_rule(q, a, b) {
                            edge_int.add(wt * wx * field.velocity_at(x, t).dot(normal) * phi.value(x, t));
                        }
                    }
                    let jump = before.values[l] - uk;
                    nu.add(jump * (dt * out * avg_n - edge_int.value()));
                }
                [
                    uk * transport.value(),
                    mu,
                    nu.value(),
                    uk * start_integral,
                    after.values[k] * end_integral,
                    boundary,
                ]
            })
            .collect();

        let mut initial = CompensatedSum::new();
        let mut terminal = CompensatedSum::new();
        for r in &per_cell {
            self.volume.add(r[0]);
            self.mu.add(r[1]);
            self.nu.add(r[2]);
            initial.add(r[3]);
            terminal.add(r[4]);
            self.touches_boundary |= r[5] > 0.0;
        }
        if need_initial {
            self.initial = Some(initial.value());
        }
        self.terminal = terminal.value();
    }

    pub fn report(&self) -> WeakFormResidual {
        let mut lhs = self.volume;
        lhs.add(self.initial.unwrap_or(0.0));
        lhs.add(-self.terminal);
        let lhs = lhs.value();
        let (mu, nu) = (self.mu.value(), self.nu.value());
        WeakFormResidual {
            lhs,
            mu,
            nu,
            residual: (lhs - (mu + nu)).abs(),
            support_touches_boundary: self.touches_boundary,
        }
    }
}

impl StepObserver for WeakFormAccumulator<'_> {
    fn observe(&mut self, view: &StepView<'_>) {
        self.add_step(view.mesh, &view.fluxes.values, view.dt, view.before, view.after);
    }
}

/// Both sides of the weak formulation over a stored trajectory with the
/// flux tables of each step.
pub fn weak_form_residual(
    mesh: &Mesh,
    trajectory: &[GridFunction],
    fluxes: &[crate::flow::EdgeFluxes],
    dt: f64,
    field: &VelocityField,
    phi: &dyn TestFunction,
    q: usize,
) -> Result<WeakFormResidual> {
    if trajectory.is_empty() || fluxes.len() + 1 != trajectory.len() {
        return Err(Error::invalid("trajectory and flux tables do not match"));
    }
    let mut acc = WeakFormAccumulator::new(phi, *field, q)?;
    for (w, f) in trajectory.windows(2).zip(fluxes) {
        if w[1].step != w[0].step + 1 || f.step != w[0].step {
            return Err(Error::invalid(format!("trajectory is not consecutive at step {}", w[0].step)));
        }
        acc.add_step(mesh, &f.values, dt, &w[0], &w[1]);
    }
    Ok(acc.report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FluxSchedule, TimeFactor};
    use crate::mesh::{build_cartesian, build_perturbed_cartesian, BoundaryKind, DomainBox};
    use crate::scheme::{cfl_timestep, evolve, project_initial, InitialData, SchemeConfig};

    struct Zero;
    impl TestFunction for Zero {
        fn value(&self, _: Vec2, _: f64) -> f64 {
            0.0
        }
        fn gradient(&self, _: Vec2, _: f64) -> Vec2 {
            Vec2::ZERO
        }
        fn time_derivative(&self, _: Vec2, _: f64) -> f64 {
            0.0
        }
    }

    fn run(mesh: &Mesh, field: &VelocityField, data: &InitialData, horizon: f64, phi: &dyn TestFunction, q: usize) -> WeakFormResidual {
        let cfg = SchemeConfig::default();
        let ts = cfl_timestep(mesh, field, &cfg, horizon).unwrap();
        let s = FluxSchedule::new(mesh, field, ts.dt).unwrap();
        let u0 = project_initial(mesh, data, &cfg).unwrap();
        let mut acc = WeakFormAccumulator::new(phi, *field, q).unwrap();
        evolve(mesh, &s, u0, ts.steps, cfg.xi, &[], Some(&mut acc)).unwrap();
        acc.report()
    }

    #[test]
    fn bump_gradient_matches_differences() {
        let phi = BumpTestFunction {
            slope: Vec2::new(0.7, -0.4),
            time_rate: 0.3,
            ..BumpTestFunction::new(Vec2::new(0.5, 0.4), 0.3)
        };
        let e = 1e-6;
        for &(x, y) in &[(0.5, 0.5), (0.6, 0.3), (0.71, 0.52), (0.3, 0.45)] {
            let p = Vec2::new(x, y);
            let g = phi.gradient(p, 0.2);
            let fx = (phi.value(p + Vec2::new(e, 0.0), 0.2) - phi.value(p - Vec2::new(e, 0.0), 0.2)) / (2.0 * e);
            let fy = (phi.value(p + Vec2::new(0.0, e), 0.2) - phi.value(p - Vec2::new(0.0, e), 0.2)) / (2.0 * e);
            assert!((g.x - fx).abs() < 1e-7 && (g.y - fy).abs() < 1e-7);
            let ft = (phi.value(p, 0.2 + e) - phi.value(p, 0.2 - e)) / (2.0 * e);
            assert!((phi.time_derivative(p, 0.2) - ft).abs() < 1e-7);
        }
        assert_eq!(phi.value(Vec2::new(0.9, 0.9), 0.0), 0.0);
    }

    #[test]
    fn zero_test_function_gives_zeros() {
        let m = build_cartesian(6, 6, DomainBox::unit(), BoundaryKind::Impermeable).unwrap();
        let r = run(&m, &VelocityField::cellular(1.0), &InitialData::rectangle(0.2, 0.2, 0.5, 0.6), 0.3, &Zero, 3);
        assert_eq!((r.lhs, r.mu, r.nu, r.residual), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_test_function_has_no_remainders() {
        // A test function that is constant in space and time over the whole
        // run: φ_t + V·∇φ = 0, so lhs = ∫u(0) - ∫u(T) = 0 and every remainder
        // term carries a vanishing factor.
        struct One;
        impl TestFunction for One {
            fn value(&self, _: Vec2, _: f64) -> f64 {
                1.0
            }
            fn gradient(&self, _: Vec2, _: f64) -> Vec2 {
                Vec2::ZERO
            }
            fn time_derivative(&self, _: Vec2, _: f64) -> f64 {
                0.0
            }
        }
        let m = build_cartesian(8, 8, DomainBox::unit(), BoundaryKind::Periodic).unwrap();
        let r = run(&m, &VelocityField::uniform(1.0, 0.5), &InitialData::rectangle(0.2, 0.2, 0.5, 0.6), 0.3, &One, 2);
        assert!(r.lhs.abs() < 1e-14 && r.mu.abs() < 1e-14, "{r:?}");
        // The edge averages of V·n cancel the flux term exactly only up to
        // round-off of the Gauss weights.
        assert!(r.nu.abs() < 1e-13 && r.residual < 1e-13, "{r:?}");
    }

    #[test]
    fn residual_shrinks_with_quadrature_order() {
        let m = build_perturbed_cartesian(16, 16, DomainBox::unit(), BoundaryKind::Impermeable, 0.2, 3).unwrap();
        let field = VelocityField::cellular(1.0).with_time(TimeFactor::Cosine { omega: 2.0 });
        let phi = BumpTestFunction {
            slope: Vec2::new(1.0, -0.5),
            time_rate: -0.8,
            ..BumpTestFunction::new(Vec2::new(0.45, 0.5), 0.3)
        };
        let data = InitialData::rectangle(0.25, 0.25, 0.55, 0.6);
        let res: Vec<WeakFormResidual> = (2..=4).map(|q| run(&m, &field, &data, 0.5, &phi, q)).collect();
        assert!(res[0].residual > res[1].residual && res[1].residual > res[2].residual, "{res:?}");
        let scale = res[2].mu.abs() + res[2].nu.abs();
        assert!(res[2].residual <= 1e-3 * scale, "{res:?}");
        assert!(!res[2].support_touches_boundary);
    }

    #[test]
    fn stored_trajectory_matches_observer() {
        let m = build_cartesian(8, 8, DomainBox::unit(), BoundaryKind::Impermeable).unwrap();
        let field = VelocityField::cellular(1.0);
        let cfg = SchemeConfig::default();
        let ts = cfl_timestep(&m, &field, &cfg, 0.2).unwrap();
        let s = FluxSchedule::new(&m, &field, ts.dt).unwrap();
        let u0 = project_initial(&m, &InitialData::rectangle(0.3, 0.3, 0.6, 0.6), &cfg).unwrap();
        let keep: Vec<usize> = (0..=ts.steps).collect();
        let phi = BumpTestFunction::new(Vec2::new(0.5, 0.5), 0.35);
        let mut acc = WeakFormAccumulator::new(&phi, field, 3).unwrap();
        let (traj, _) = evolve(&m, &s, u0, ts.steps, cfg.xi, &keep, Some(&mut acc)).unwrap();
        let fluxes: Vec<_> = (0..ts.steps).map(|n| s.at_step(n)).collect();
        let r = weak_form_residual(&m, &traj, &fluxes, ts.dt, &field, &phi, 3).unwrap();
        assert_eq!(r, acc.report());
        assert!(weak_form_residual(&m, &traj, &fluxes[1..], ts.dt, &field, &phi, 3).is_err());
    }
}
