use std::fs;
use std::path::{Path, PathBuf};

use advect_core::analysis::{error_report, ConvergenceRow, ConvergenceTable, EnergyAccumulator, EnergyReport, EocFit, ErrorReport};
use advect_core::characteristics::{ExactSolution, FlowSampler};
use advect_core::flow::FluxSchedule;
use advect_core::scheme::{cfl_timestep, evolve, project_initial, snapshot_steps, write_grid_function, StepReport, TimeStep};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, StudySpec};
use crate::error::CliError;
use crate::output::{self, write_file};

/// Tolerances a finished run is checked against before its tables are
/// written.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const MASS_TOLERANCE: f64 = 1e-12;
pub const BOUND_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub timestep: TimeStep,
    pub steps: StepReport,
    pub energy: EnergyReport,
    pub error: ErrorReport,
    pub row: ConvergenceRow,
}

#[derive(Debug, Clone)]
pub struct StudySummary {
    pub dir: PathBuf,
    pub table: ConvergenceTable,
    pub fit: EocFit,
    pub pass: bool,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Runs one experiment and writes `report.csv`, `energy.csv`, `error.csv`
/// (and snapshots if requested) into `root/<output>`.
pub fn run_experiment(config: &ExperimentConfig, root: &Path) -> Result<RunSummary, CliError> {
    let exp = config.validate()?;
    let mesh = exp.build_mesh()?;
    let ts = cfl_timestep(&mesh, &exp.field, &exp.scheme, exp.horizon)?;
    let schedule = FluxSchedule::new(&mesh, &exp.field, ts.dt)?;
    let u0 = project_initial(&mesh, &exp.data, &exp.scheme)?;
    let keep = snapshot_steps(&exp.snapshots, &ts);
    let mut energy = EnergyAccumulator::new(&mesh, &u0);
    let (snapshots, steps) = evolve(&mesh, &schedule, u0, ts.steps, exp.scheme.xi, &keep, Some(&mut energy))?;
    let energy = energy.report();

    if !(energy.identity_residual <= IDENTITY_TOLERANCE) {
        return Err(CliError::Numerical(format!(
            "energy identity residual {:.3e} exceeds {IDENTITY_TOLERANCE:e}",
            energy.identity_residual
        )));
    }
    let drift = steps.relative_mass_drift();
    if !(drift <= MASS_TOLERANCE) {
        return Err(CliError::Numerical(format!("relative mass drift {drift:.3e} exceeds {MASS_TOLERANCE:e}")));
    }
    let scale = steps.records[0].min.abs().max(steps.records[0].max.abs()).max(1.0);
    let excursion = steps.bound_excursion();
    if !(excursion <= BOUND_TOLERANCE * scale) {
        let step = steps
            .records
            .iter()
            .find(|r| r.min < steps.records[0].min || r.max > steps.records[0].max)
            .map_or(0, |r| r.step);
        return Err(CliError::Numerical(format!(
            "maximum principle violated by {excursion:.3e} at step {step}"
        )));
    }

    let exact = ExactSolution::new(exp.data.clone(), FlowSampler::new(exp.field, mesh.domain, mesh.boundary))?;
    let error = error_report(&mesh, &snapshots, &exact)?;
    let row = output::convergence_row(mesh.mesh_size(), ts.dt, exp.scheme.xi, exp.mesh_kind.as_str(), error.l1_at_t, &energy);

    let dir = root.join(config.output.as_deref().unwrap_or("."));
    create_dir(&dir)?;
    write_file(&dir.join("report.csv"), &output::report_csv(&steps))?;
    write_file(&dir.join("energy.csv"), &output::energy_csv(&row))?;
    write_file(&dir.join("error.csv"), &output::error_csv(&error))?;
    if exp.write_snapshots {
        for s in &snapshots {
            let path = dir.join(format!("snapshot_{:06}.txt", s.step));
            let mut buf = Vec::new();
            write_grid_function(s, &mut buf).map_err(|e| CliError::io(&path, e))?;
            fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(RunSummary {
        dir,
        timestep: ts,
        steps,
        energy,
        error,
        row,
    })
}

/// Runs every level of a study (concurrently, each in its own directory),
/// then writes `convergence.csv`, `eoc.csv` and `convergence.svg`. Fails
/// with [`CliError::EocOutsideWindow`] after writing if the fitted order
/// misses the window.
pub fn converge_study(study: &StudySpec, root: &Path) -> Result<StudySummary, CliError> {
    study.validate()?;
    let dir = root.join(study.output.as_deref().unwrap_or("."));
    create_dir(&dir)?;
    let rows: Vec<ConvergenceRow> = study
        .levels
        .par_iter()
        .map(|&n| {
            run_experiment(&study.level(n), &dir)
                .map(|s| s.row)
                .map_err(|e| e.context(&format!("level n = {n}")))
        })
        .collect::<Result<_, _>>()?;
    let table = ConvergenceTable::new(rows)?;
    let fit = table.fit.expect("studies have at least two levels");
    let [lo, hi] = study.window;
    let pass = (lo..=hi).contains(&fit.slope);

    let mut csv = Vec::new();
    table.write_csv(&mut csv).map_err(|e| CliError::io(dir.join("convergence.csv"), e))?;
    let csv_path = dir.join("convergence.csv");
    fs::write(&csv_path, csv).map_err(|e| CliError::io(&csv_path, e))?;
    write_file(&dir.join("eoc.csv"), &output::eoc_csv(&fit, study.window, pass))?;
    let points: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.h, r.l1_error)).collect();
    write_file(&dir.join("convergence.svg"), &output::loglog_svg(&points, &fit))?;

    if !pass {
        return Err(CliError::EocOutsideWindow { slope: fit.slope, lo, hi });
    }
    Ok(StudySummary { dir, table, fit, pass })
}
