use rayon::prelude::*;

use crate::characteristics::ExactSolution;
use crate::mesh::Mesh;
use crate::quadrature::{polygon_rule, CellRuleKind};
use crate::scheme::GridFunction;
use crate::sum::compensated_sum;
use crate::{Error, Result};

/// Sampling density the adaptive L¹ measurement starts from.
pub const DEFAULT_L1_DENSITY: usize = 8;
/// Largest density the adaptive measurement doubles to.
pub const MAX_L1_DENSITY: usize = 64;
/// Relative change below which doubling stops.
pub const L1_RELATIVE_CHANGE: f64 = 0.01;

/// `‖u(·, t) - u_h(·, t)‖_{L¹}` with `k x k` midpoint samples per cell,
/// weighted by the cell Jacobian so that the weights sum to `|K|` on any
/// cell shape.
pub fn l1_error(mesh: &Mesh, u: &GridFunction, exact: &ExactSolution, t: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("sampling density must be positive"));
    }
    if u.len() != mesh.num_cells() {
        return Err(Error::invalid("grid function does not match the mesh"));
    }
    let per_cell: Vec<f64> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let uk = u.values[c];
            compensated_sum(
                polygon_rule(&mesh.cell_points(c), CellRuleKind::Midpoint(k))
                    .into_iter()
                    .map(|(p, w)| w * (uk - exact.eval(p, t)).abs()),
            )
        })
        .collect();
    Ok(compensated_sum(per_cell))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Measurement {
    pub value: f64,
    /// Density of the reported value.
    pub density: usize,
    /// `|e_{k/2} - e_k|` at the final density.
    pub quadrature_estimate: f64,
}

/// L¹ error with densities `8, 16, ...` until two successive values differ
/// by less than 1%, or the density reaches 64.
pub fn l1_error_adaptive(mesh: &Mesh, u: &GridFunction, exact: &ExactSolution, t: f64) -> Result<L1Measurement> {
    let mut k = DEFAULT_L1_DENSITY;
    let mut prev = l1_error(mesh, u, exact, t, k)?;
    loop {
        let next = l1_error(mesh, u, exact, t, 2 * k)?;
        let change = (next - prev).abs();
        k *= 2;
        if change <= L1_RELATIVE_CHANGE * next.abs() || k >= MAX_L1_DENSITY {
            return Ok(L1Measurement {
                value: next,
                density: k,
                quadrature_estimate: change,
            });
        }
        prev = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// Error at the last snapshot.
    pub l1_at_t: f64,
    /// Largest error over all snapshots.
    pub linf_t_l1: f64,
    /// Largest density used.
    pub sampling_density: usize,
    /// Largest quadrature estimate.
    pub estimated_quadrature_error: f64,
}

/// Measures every snapshot against the exact solution at its own time.
pub fn error_report(mesh: &Mesh, snapshots: &[GridFunction], exact: &ExactSolution) -> Result<ErrorReport> {
    let last = snapshots.last().ok_or_else(|| Error::invalid("no snapshots to measure"))?;
    let mut report = ErrorReport {
        l1_at_t: 0.0,
        linf_t_l1: 0.0,
        sampling_density: 0,
        estimated_quadrature_error: 0.0,
    };
    for s in snapshots {
        let m = l1_error_adaptive(mesh, s, exact, s.time)?;
        if std::ptr::eq(s, last) {
            report.l1_at_t = m.value;
        }
        report.linf_t_l1 = report.linf_t_l1.max(m.value);
        report.sampling_density = report.sampling_density.max(m.density);
        report.estimated_quadrature_error = report.estimated_quadrature_error.max(m.quadrature_estimate);
    }
    Ok(report)
}

/// `Σ_{interior edges} |K|L| |u_L - u_K|`, i.e. half the sum over cells of
/// the jumps across their edges.
pub fn discrete_total_variation(mesh: &Mesh, u: &GridFunction) -> f64 {
    compensated_sum(
        mesh.edges
            .iter()
            .filter_map(|e| e.right.map(|r| e.length * (u.values[r] - u.values[e.left]).abs())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::FlowSampler;
    use crate::flow::VelocityField;
    use crate::mesh::{build_cartesian, build_perturbed_cartesian, BoundaryKind, DomainBox};
    use crate::scheme::{project_initial, AnalyticProfile, InitialData, SchemeConfig};

    fn periodic_uniform() -> FlowSampler {
        FlowSampler::new(VelocityField::uniform(1.0, 0.0), DomainBox::unit(), BoundaryKind::Periodic)
    }

    #[test]
    fn exact_constant_has_zero_error() {
        let m = build_perturbed_cartesian(5, 5, DomainBox::unit(), BoundaryKind::Periodic, 0.3, 1).unwrap();
        let exact = ExactSolution::new(InitialData::Analytic(AnalyticProfile::Constant { value: 0.3 }), periodic_uniform()).unwrap();
        let u = GridFunction::new(vec![0.3; 25], 0, 0.2);
        assert_eq!(l1_error(&m, &u, &exact, 0.2, 4).unwrap(), 0.0);
        let shifted = GridFunction::new(vec![0.4; 25], 0, 0.2);
        assert!((l1_error(&m, &shifted, &exact, 0.2, 4).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn shifted_square_error_approaches_overlap_geometry() {
        // A side-L square shifted by δ differs from the original on a set of
        // area 2 L δ.
        let m = build_cartesian(10, 10, DomainBox::unit(), BoundaryKind::Periodic).unwrap();
        let data = InitialData::rectangle(0.2, 0.2, 0.6, 0.6);
        let u0 = project_initial(&m, &data, &SchemeConfig::default()).unwrap();
        let exact = ExactSolution::new(data, periodic_uniform()).unwrap();
        let delta = 0.037;
        let expected = 2.0 * 0.4 * delta;
        let coarse = (l1_error(&m, &u0, &exact, delta, 4).unwrap() - expected).abs();
        let fine = (l1_error(&m, &u0, &exact, delta, 64).unwrap() - expected).abs();
        assert!(fine < coarse || fine < 1e-12);
        // Each of the two shifted edges is resolved to half a sample width.
        assert!(fine <= 2.0 * 0.4 * (0.1 / 64.0) / 2.0, "{fine}");
        let adaptive = l1_error_adaptive(&m, &u0, &exact, delta).unwrap();
        assert!((adaptive.value - expected).abs() < 5e-3);
        assert!(adaptive.density >= 16);
    }

    #[test]
    fn error_report_takes_worst_snapshot() {
        let m = build_cartesian(4, 4, DomainBox::unit(), BoundaryKind::Periodic).unwrap();
        let exact = ExactSolution::new(InitialData::Analytic(AnalyticProfile::Constant { value: 0.0 }), periodic_uniform()).unwrap();
        let a = GridFunction::new(vec![0.5; 16], 0, 0.0);
        let b = GridFunction::new(vec![0.25; 16], 1, 0.1);
        let r = error_report(&m, &[a, b], &exact).unwrap();
        assert!((r.l1_at_t - 0.25).abs() < 1e-15);
        assert!((r.linf_t_l1 - 0.5).abs() < 1e-15);
        assert!(r.estimated_quadrature_error < 1e-15);
    }

    #[test]
    fn total_variation_examples() {
        let m = build_cartesian(8, 8, DomainBox::unit(), BoundaryKind::Impermeable).unwrap();
        assert_eq!(discrete_total_variation(&m, &GridFunction::new(vec![2.0; 64], 0, 0.0)), 0.0);

        // Mesh-aligned square of side 1/2 in a periodic unit box: perimeter 2.
        let p = build_cartesian(8, 8, DomainBox::unit(), BoundaryKind::Periodic).unwrap();
        let u = project_initial(&p, &InitialData::rectangle(0.25, 0.25, 0.75, 0.75), &SchemeConfig::default()).unwrap();
        assert!((discrete_total_variation(&p, &u) - 2.0).abs() < 1e-14);

        // Indicator of the unit square inside [-1, 2]^2: perimeter 4.
        let big = DomainBox::new(crate::Vec2::new(-1.0, -1.0), crate::Vec2::new(2.0, 2.0)).unwrap();
        let m3 = build_cartesian(3, 3, big, BoundaryKind::Impermeable).unwrap();
        let mut vals = vec![0.0; 9];
        vals[4] = 1.0;
        assert!((discrete_total_variation(&m3, &GridFunction::new(vals, 0, 0.0)) - 4.0).abs() < 1e-15);

        // Checkerboard: every interior edge carries a unit jump.
        let n = 6;
        let s = 1.0 / n as f64;
        let checker: Vec<f64> = (0..n * n).map(|k| ((k % n + k / n) % 2) as f64).collect();
        let mc = build_cartesian(n, n, DomainBox::unit(), BoundaryKind::Impermeable).unwrap();
        let tv = discrete_total_variation(&mc, &GridFunction::new(checker, 0, 0.0));
        assert!((tv - s * mc.interior_edge_count() as f64).abs() < 1e-14);
    }
}
