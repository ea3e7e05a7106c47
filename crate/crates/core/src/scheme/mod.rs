//! Explicit upwind finite-volume scheme.
//!
//! One step reads
//!
//! ```text
//! u_K^{n+1} = (1 - Σ_L w_KL) u_K^n + Σ_L w_KL u_L^n,   w_KL = |V_KL^n| δt / |K|
//! ```
//!
//! where `L` runs over the inflow neighbors of `K` (outward flux `V_KL^n < 0`).
//! Under the CFL condition `Σ_L w_KL <= 1 - ξ` this is a convex combination,
//! which gives the maximum principle directly.

mod initial;
mod io;
mod report;

pub use initial::{AnalyticProfile, AuxGrid, InitialData, ProjectionMode};
pub use io::{read_grid_function, write_grid_function};
pub use report::{StepRecord, StepReport};

use rayon::prelude::*;

use crate::flow::{EdgeFluxes, FluxSchedule, VelocityField};
use crate::mesh::Mesh;
use crate::{Error, Result};

/// Relative slack on the CFL bound absorbing rounding in `δt = t / (N+1)`
/// and in the fluxes.
pub const CFL_SLACK: f64 = 1e-12;

/// Cell averages `u_K^n` at time `n δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
    pub step: usize,
    pub time: f64,
}

impl GridFunction {
    pub fn new(values: Vec<f64>, step: usize, time: f64) -> Self {
        Self { values, step, time }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    /// CFL margin `ξ ∈ [0, 1)`.
    pub xi: f64,
    /// `δt <= c0 h`; may be infinite.
    pub c0: f64,
    pub projection: ProjectionMode,
    /// Samples per cell direction for analytic initial data.
    pub sample_density: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            xi: 0.1,
            c0: 1.0,
            projection: ProjectionMode::ExactClip,
            sample_density: 8,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.xi) {
            return Err(Error::invalid(format!("xi = {} must lie in [0, 1)", self.xi)));
        }
        if !(self.c0 > 0.0) {
            return Err(Error::invalid(format!("c0 = {} must be positive", self.c0)));
        }
        if self.sample_density == 0 {
            return Err(Error::invalid("sample density must be positive"));
        }
        if let ProjectionMode::Sampled(0) = self.projection {
            return Err(Error::invalid("sampled projection needs a positive density"));
        }
        Ok(())
    }
}

/// Cell averages of the initial data.
pub fn project_initial(mesh: &Mesh, data: &InitialData, config: &SchemeConfig) -> Result<GridFunction> {
    config.validate()?;
    let values = initial::project(mesh, data, config.projection, config.sample_density)?;
    Ok(GridFunction::new(values, 0, 0.0))
}

/// Time step selected by [`cfl_timestep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStep {
    pub dt: f64,
    /// Number of steps `N + 1`, so that `horizon = steps * dt`.
    pub steps: usize,
    /// Largest step allowed by the cellwise CFL condition.
    pub cfl_bound: f64,
    /// `c0 h`.
    pub c0_bound: f64,
}

/// Largest `δt = t / (N+1)` satisfying both the cellwise CFL condition and
/// `δt <= c0 h`. For time-dependent fields the bound uses `sup |g|` and the
/// larger of the inflow and outflow sums, so it holds whatever the sign of
/// `g`.
pub fn cfl_timestep(mesh: &Mesh, field: &VelocityField, config: &SchemeConfig, horizon: f64) -> Result<TimeStep> {
    config.validate()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
    }
    let schedule = FluxSchedule::new(mesh, field, 1.0)?;
    let spatial = schedule.spatial();
    let constant_positive = field.time.is_constant();
    let g_sup = field.time.sup_abs();
    let mut cfl_bound = f64::INFINITY;
    for cell in &mesh.cells {
        let (mut inflow, mut outflow) = (0.0, 0.0);
        for ce in &cell.edges {
            let out = ce.sign * spatial[ce.edge];
            if out < 0.0 {
                inflow -= out;
            } else {
                outflow += out;
            }
        }
        let rate = if constant_positive { inflow } else { inflow.max(outflow) * g_sup };
        if rate > 0.0 {
            cfl_bound = cfl_bound.min((1.0 - config.xi) * cell.area / rate);
        }
    }
    let c0_bound = config.c0 * mesh.mesh_size();
    let bound = cfl_bound.min(c0_bound).min(horizon);
    let steps = if bound.is_finite() {
        ((horizon / bound) * (1.0 - CFL_SLACK)).ceil().max(1.0) as usize
    } else {
        1
    };
    Ok(TimeStep {
        dt: horizon / steps as f64,
        steps,
        cfl_bound,
        c0_bound,
    })
}

/// One upwind step. Refuses if the CFL condition fails in some cell.
pub fn upwind_step(mesh: &Mesh, u: &GridFunction, fluxes: &EdgeFluxes, dt: f64, xi: f64) -> Result<GridFunction> {
    if u.len() != mesh.num_cells() {
        return Err(Error::invalid(format!(
            "grid function has {} values for {} cells",
            u.len(),
            mesh.num_cells()
        )));
    }
    let limit = (1.0 - xi) * (1.0 + CFL_SLACK);
    let updated: Vec<(f64, f64)> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|k| update_cell(mesh, &u.values, fluxes, dt, k))
        .collect();
    if let Some((cell, &(_, weight))) = updated.iter().enumerate().find(|(_, (_, w))| !(*w <= limit)) {
        return Err(Error::CflViolation {
            step: u.step,
            cell,
            weight,
            limit: 1.0 - xi,
        });
    }
    Ok(GridFunction::new(
        updated.into_iter().map(|(v, _)| v).collect(),
        u.step + 1,
        (u.step + 1) as f64 * dt,
    ))
}

/// New value of cell `k` and its total inflow weight.
#[inline]
fn update_cell(mesh: &Mesh, u: &[f64], fluxes: &EdgeFluxes, dt: f64, k: usize) -> (f64, f64) {
    let cell = &mesh.cells[k];
    let mut weight_sum = 0.0;
    let mut upwind = 0.0;
    for ce in &cell.edges {
        let out = ce.sign * fluxes.values[ce.edge];
        if out < 0.0 {
            let e = &mesh.edges[ce.edge];
            let Some(l) = e.neighbor_of(k, ce.sign) else {
                continue;
            };
            let w = -out * dt / cell.area;
            weight_sum += w;
            upwind += w * u[l];
        }
    }
    ((1.0 - weight_sum) * u[k] + upwind, weight_sum)
}

/// Everything an observer sees about a completed step `n -> n+1`.
pub struct StepView<'a> {
    pub mesh: &'a Mesh,
    pub dt: f64,
    pub fluxes: &'a EdgeFluxes,
    pub before: &'a GridFunction,
    pub after: &'a GridFunction,
}

/// Hook called after every step; used by the energy and weak-form
/// diagnostics so full trajectories need not be stored.
pub trait StepObserver {
    fn observe(&mut self, view: &StepView<'_>);
}

impl<F: FnMut(&StepView<'_>)> StepObserver for F {
    fn observe(&mut self, view: &StepView<'_>) {
        self(view)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Snapshots in increasing time, always including the initial and
    /// final states.
    pub snapshots: Vec<GridFunction>,
    pub report: StepReport,
    pub timestep: TimeStep,
}

impl RunOutput {
    pub fn initial(&self) -> &GridFunction {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &GridFunction {
        self.snapshots.last().expect("snapshots are never empty")
    }
}

/// Advances `u0` by `steps` steps of the schedule, keeping the states whose
/// step index is listed in `keep` (plus the first and last).
pub fn evolve(
    mesh: &Mesh,
    schedule: &FluxSchedule,
    u0: GridFunction,
    steps: usize,
    xi: f64,
    keep: &[usize],
    mut observer: Option<&mut dyn StepObserver>,
) -> Result<(Vec<GridFunction>, StepReport)> {
    let dt = schedule.dt();
    let mut report = StepReport::default();
    report.push(mesh, &u0);
    let mut snapshots = vec![u0.clone()];
    let mut u = u0;
    for n in u.step..u.step + steps {
        let fluxes = schedule.at_step(n);
        let next = upwind_step(mesh, &u, &fluxes, dt, xi)?;
        if let Some(obs) = observer.as_deref_mut() {
            obs.observe(&StepView {
                mesh,
                dt,
                fluxes: &fluxes,
                before: &u,
                after: &next,
            });
        }
        report.push(mesh, &next);
        u = next;
        if keep.contains(&u.step) && u.step != snapshots.last().map_or(usize::MAX, |s| s.step) {
            snapshots.push(u.clone());
        }
    }
    if snapshots.last().map(|s| s.step) != Some(u.step) {
        snapshots.push(u);
    }
    Ok((snapshots, report))
}

/// Projects the data, selects `δt` and runs to `horizon`. Requested snapshot
/// times are rounded to the nearest step.
pub fn run_to_time(
    mesh: &Mesh,
    field: &VelocityField,
    data: &InitialData,
    config: &SchemeConfig,
    horizon: f64,
    snapshot_times: &[f64],
    observer: Option<&mut dyn StepObserver>,
) -> Result<RunOutput> {
    field.check_compatible(&mesh.domain, mesh.boundary)?;
    let timestep = cfl_timestep(mesh, field, config, horizon)?;
    let u0 = project_initial(mesh, data, config)?;
    let schedule = FluxSchedule::new(mesh, field, timestep.dt)?;
    let keep = snapshot_steps(snapshot_times, &timestep);
    let (snapshots, report) = evolve(mesh, &schedule, u0, timestep.steps, config.xi, &keep, observer)?;
    Ok(RunOutput {
        snapshots,
        report,
        timestep,
    })
}

/// Step indices nearest to the requested times, clamped to the run.
pub fn snapshot_steps(times: &[f64], timestep: &TimeStep) -> Vec<usize> {
    let mut steps: Vec<usize> = times
        .iter()
        .filter(|t| t.is_finite())
        .map(|t| ((t / timestep.dt).round().max(0.0) as usize).min(timestep.steps))
        .collect();
    steps.sort_unstable();
    steps.dedup();
    steps
}

#[cfg(test)]
mod tests;
