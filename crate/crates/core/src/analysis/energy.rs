//! Discrete energy functionals.
//!
//! Summing the square of the scheme over cells gives the exact identity
//!
//! ```text
//! ε_h = Σ_n Σ_K Σ_L a_KK |V_KL| δt (u_L - u_K)^2
//!     + ½ Σ_n Σ_K Σ_{L,M} V_KL V_KM δt² / |K| (u_M - u_L)^2
//! ```
//!
//! with `a_KK = 1 - Σ_L |V_KL| δt / |K|` and `L, M` ranging over inflow
//! edges. Both sides are accumulated independently so the identity can be
//! checked to round-off.

use crate::flow::{EdgeFluxes, FluxSchedule};
use crate::mesh::Mesh;
use crate::scheme::{GridFunction, StepObserver, StepView};
use crate::sum::CompensatedSum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `Σ |K| |u^{n+1} - u^n|^2 + Σ δt |V_KL| |u_L - u_K|^2`.
    pub e_h: f64,
    /// `Σ δt |V_KL| |u_L - u_K|`.
    pub q_h: f64,
    /// `‖u_h(0)‖² - ‖u_h(t)‖²`.
    pub eps_h: f64,
    /// Jump part of `E_h`.
    pub jump_energy: f64,
    /// Right-hand side of the identity.
    pub identity_rhs: f64,
    /// `|ε_h - rhs| / max(1, |ε_h|)`.
    pub identity_residual: f64,
    /// Largest relative excess of the per-cell Cauchy-Schwarz bound
    /// `|K| |Δu|² <= (Σ w) Σ |V| δt |u_L - u_K|²`, compared in square-root
    /// form up to a few ulps; non-positive when it holds everywhere.
    pub cauchy_schwarz_excess: f64,
    /// Squared L² norm of the initial state.
    pub initial_norm2: f64,
    pub steps: usize,
}

impl EnergyReport {
    /// `ξ E_h <= 2 ε_h (1 + 1e-12)`.
    pub fn chain_holds(&self, xi: f64) -> bool {
        xi * self.e_h <= 2.0 * self.eps_h * (1.0 + 1e-12)
    }

    /// `ξ Σ δt |V| |u_L - u_K|^2 <= ε_h + 1e-12`.
    pub fn jump_bound_holds(&self, xi: f64) -> bool {
        xi * self.jump_energy <= self.eps_h + 1e-12
    }

    pub fn cauchy_schwarz_holds(&self) -> bool {
        self.cauchy_schwarz_excess <= 0.0
    }
}

/// Step observer accumulating the energy functionals of a run.
#[derive(Debug, Clone)]
pub struct EnergyAccumulator {
    increment: CompensatedSum,
    jumps: CompensatedSum,
    q: CompensatedSum,
    rhs: CompensatedSum,
    initial_norm2: f64,
    last_norm2: f64,
    cs_excess: f64,
    steps: usize,
}

impl EnergyAccumulator {
    pub fn new(mesh: &Mesh, u0: &GridFunction) -> Self {
        let n2 = norm2(mesh, u0);
        Self {
            increment: CompensatedSum::new(),
            jumps: CompensatedSum::new(),
            q: CompensatedSum::new(),
            rhs: CompensatedSum::new(),
            initial_norm2: n2,
            last_norm2: n2,
            cs_excess: f64::NEG_INFINITY,
            steps: 0,
        }
    }

    pub fn add_step(&mut self, mesh: &Mesh, fluxes: &EdgeFluxes, dt: f64, before: &GridFunction, after: &GridFunction) {
        let u = &before.values;
        let mut inflow: Vec<(f64, f64)> = Vec::with_capacity(8);
        for (k, cell) in mesh.cells.iter().enumerate() {
            inflow.clear();
            for ce in &cell.edges {
                let out = ce.sign * fluxes.values[ce.edge];
                if out < 0.0 {
                    if let Some(l) = mesh.edges[ce.edge].neighbor_of(k, ce.sign) {
                        inflow.push((-out, u[l]));
                    }
                }
            }
            let uk = u[k];
            let du = after.values[k] - uk;
            let inc = cell.area * du * du;
            self.increment.add(inc);
            let weight: f64 = inflow.iter().map(|&(v, _)| v * dt / cell.area).sum();
            let a_kk = 1.0 - weight;
            let mut cell_jumps = CompensatedSum::new();
            for &(v, ul) in &inflow {
                let jump = ul - uk;
                let j2 = v * dt * jump * jump;
                cell_jumps.add(j2);
                self.q.add(v * dt * jump.abs());
                self.rhs.add(a_kk * j2);
            }
            let j = cell_jumps.value();
            self.jumps.add(j);
            for (i, &(vl, ul)) in inflow.iter().enumerate() {
                for &(vm, um) in &inflow[i + 1..] {
                    // Off-diagonal pairs appear twice in the double sum and
                    // cancel the factor one half.
                    let d = um - ul;
                    self.rhs.add(vl * vm * dt * dt / cell.area * d * d);
                }
            }
            // Compared unsquared, |Δu| <= √((Σ w) Σ w |u_L - u_K|²), in units
            // of the local data scale so tiny values do not underflow, with
            // a slack of a few ulps since Δu is a difference of rounded values.
            let local = inflow.iter().fold(uk.abs().max(after.values[k].abs()), |m, &(_, ul)| m.max(ul.abs()));
            let excess = if local == 0.0 {
                0.0
            } else {
                let scaled: f64 = inflow
                    .iter()
                    .map(|&(v, ul)| v * dt / cell.area * ((ul - uk) / local).powi(2))
                    .sum();
                let bound = (weight * scaled).sqrt();
                let slack = 4.0 * f64::EPSILON;
                (du.abs() / local - bound - slack) / (bound + slack)
            };
            self.cs_excess = self.cs_excess.max(excess);
        }
        self.last_norm2 = norm2(mesh, after);
        self.steps += 1;
    }

    pub fn report(&self) -> EnergyReport {
        let eps_h = self.initial_norm2 - self.last_norm2;
        let rhs = self.rhs.value();
        let jumps = self.jumps.value();
        EnergyReport {
            e_h: self.increment.value() + jumps,
            q_h: self.q.value(),
            eps_h,
            jump_energy: jumps,
            identity_rhs: rhs,
            identity_residual: (eps_h - rhs).abs() / eps_h.abs().max(1.0),
            cauchy_schwarz_excess: if self.steps == 0 { 0.0 } else { self.cs_excess },
            initial_norm2: self.initial_norm2,
            steps: self.steps,
        }
    }
}

impl StepObserver for EnergyAccumulator {
    fn observe(&mut self, view: &StepView<'_>) {
        self.add_step(view.mesh, view.fluxes, view.dt, view.before, view.after);
    }
}

fn norm2(mesh: &Mesh, u: &GridFunction) -> f64 {
    let mut s = CompensatedSum::new();
    for (c, v) in mesh.cells.iter().zip(&u.values) {
        s.add(c.area * v * v);
    }
    s.value()
}

/// Energy functionals of a stored trajectory `u^0, ..., u^N` with the flux
/// tables `fluxes[n]` of each step.
pub fn energy_quantities(mesh: &Mesh, trajectory: &[GridFunction], fluxes: &[EdgeFluxes], dt: f64) -> Result<EnergyReport> {
    let first = trajectory.first().ok_or_else(|| Error::invalid("empty trajectory"))?;
    if fluxes.len() + 1 != trajectory.len() {
        return Err(Error::invalid(format!(
            "trajectory of {} states needs {} flux tables, got {}",
            trajectory.len(),
            trajectory.len() - 1,
            fluxes.len()
        )));
    }
    let mut acc = EnergyAccumulator::new(mesh, first);
    for (w, f) in trajectory.windows(2).zip(fluxes) {
        if w[1].step != w[0].step + 1 || f.step != w[0].step {
            return Err(Error::invalid(format!("trajectory is not consecutive at step {}", w[0].step)));
        }
        acc.add_step(mesh, f, dt, &w[0], &w[1]);
    }
    Ok(acc.report())
}

/// Relative residual of the energy identity over a stored trajectory whose
/// fluxes come from `schedule`.
pub fn energy_identity_residual(mesh: &Mesh, trajectory: &[GridFunction], schedule: &FluxSchedule) -> Result<f64> {
    let fluxes: Vec<EdgeFluxes> = trajectory
        .iter()
        .take(trajectory.len().saturating_sub(1))
        .map(|u| schedule.at_step(u.step))
        .collect();
    Ok(energy_quantities(mesh, trajectory, &fluxes, schedule.dt())?.identity_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{TimeFactor, VelocityField};
    use crate::mesh::{build_cartesian, build_perturbed_cartesian, BoundaryKind, DomainBox};
    use crate::scheme::{cfl_timestep, upwind_step, SchemeConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trajectory(mesh: &Mesh, schedule: &FluxSchedule, u0: GridFunction, steps: usize, xi: f64) -> (Vec<GridFunction>, Vec<EdgeFluxes>) {
        let mut traj = vec![u0];
        let mut fl = Vec::new();
        for n in 0..steps {
            let f = schedule.at_step(n);
            let next = upwind_step(mesh, &traj[n], &f, schedule.dt(), xi).unwrap();
            traj.push(next);
            fl.push(f);
        }
        (traj, fl)
    }

    #[test]
    fn constant_data_has_no_energy() {
        let m = build_perturbed_cartesian(6, 6, DomainBox::unit(), BoundaryKind::Impermeable, 0.3, 1).unwrap();
        let field = VelocityField::cellular(1.0);
        let ts = cfl_timestep(&m, &field, &SchemeConfig::default(), 0.5).unwrap();
        let s = FluxSchedule::new(&m, &field, ts.dt).unwrap();
        let (traj, fl) = trajectory(&m, &s, GridFunction::new(vec![0.5; 36], 0, 0.0), ts.steps, 0.1);
        let r = energy_quantities(&m, &traj, &fl, ts.dt).unwrap();
        assert_eq!(r.q_h, 0.0);
        assert_eq!(r.jump_energy, 0.0);
        assert!(r.e_h < 1e-30 && r.eps_h.abs() < 1e-15);
        assert!(r.identity_residual < 1e-15);
    }

    #[test]
    fn unit_shift_on_a_strip() {
        // Four cells in a periodic row; with unit CFL every value moves one
        // cell east, so the increment and jump sums coincide.
        let m = build_cartesian(4, 1, DomainBox::unit(), BoundaryKind::Periodic).unwrap();
        let dt = 0.25;
        let s = FluxSchedule::new(&m, &VelocityField::uniform(1.0, 0.0), dt).unwrap();
        let u0 = GridFunction::new(vec![1.0, 1.0, 0.0, 0.0], 0, 0.0);
        let (traj, fl) = trajectory(&m, &s, u0, 1, 0.0);
        assert_eq!(traj[1].values, vec![0.0, 1.0, 1.0, 0.0]);
        let r = energy_quantities(&m, &traj, &fl, dt).unwrap();
        // Two cells change by 1, each of area 1/4.
        assert!((r.jump_energy - 0.5).abs() < 1e-15);
        assert!((r.e_h - 1.0).abs() < 1e-15);
        assert!((r.q_h - 0.5).abs() < 1e-15);
        assert_eq!(r.eps_h, 0.0);
        assert!(r.identity_residual < 1e-15);
    }

    #[test]
    fn zero_velocity_keeps_eps_zero() {
        let m = build_cartesian(5, 5, DomainBox::unit(), BoundaryKind::Impermeable).unwrap();
        let s = FluxSchedule::new(&m, &VelocityField::cellular(0.0), 0.1).unwrap();
        let vals: Vec<f64> = (0..25).map(|k| (k % 4) as f64).collect();
        let (traj, fl) = trajectory(&m, &s, GridFunction::new(vals, 0, 0.0), 5, 0.0);
        let r = energy_quantities(&m, &traj, &fl, 0.1).unwrap();
        assert_eq!(r.eps_h, 0.0);
        assert_eq!(r.e_h, 0.0);
    }

    #[test]
    fn identity_on_random_perturbed_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..6 {
            let m = build_perturbed_cartesian(8, 8, DomainBox::unit(), BoundaryKind::Impermeable, 0.3, trial).unwrap();
            let field = VelocityField::cellular(rng.gen_range(0.5..2.0)).with_time(TimeFactor::Cosine { omega: rng.gen_range(0.0..8.0) });
            let xi = rng.gen_range(0.0..0.5);
            let cfg = SchemeConfig { xi, ..SchemeConfig::default() };
            let ts = cfl_timestep(&m, &field, &cfg, 1.0).unwrap();
            let s = FluxSchedule::new(&m, &field, ts.dt).unwrap();
            let vals: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (traj, fl) = trajectory(&m, &s, GridFunction::new(vals, 0, 0.0), 10, xi);
            let r = energy_quantities(&m, &traj, &fl, ts.dt).unwrap();
            assert!(r.identity_residual <= 1e-12, "{r:?}");
            assert!(r.chain_holds(xi) && r.jump_bound_holds(xi) && r.cauchy_schwarz_holds(), "{r:?}");
            assert!(r.eps_h >= -1e-12 * r.initial_norm2);
            assert_eq!(energy_identity_residual(&m, &traj, &s).unwrap(), r.identity_residual);
        }
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let m = build_cartesian(2, 2, DomainBox::unit(), BoundaryKind::Periodic).unwrap();
        let u = GridFunction::new(vec![0.0; 4], 0, 0.0);
        assert!(energy_quantities(&m, &[u.clone(), u], &[], 0.1).is_err());
        assert!(energy_quantities(&m, &[], &[], 0.1).is_err());
    }
}
