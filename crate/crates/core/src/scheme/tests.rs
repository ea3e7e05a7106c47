use super::*;
use crate::flow::{edge_time_flux, TimeFactor};
use crate::geometry::{signed_area, Vec2};
use crate::mesh::{build_cartesian, build_perturbed_cartesian, BoundaryKind, DomainBox};
use proptest::prelude::*;

fn unit(n: usize, boundary: BoundaryKind) -> Mesh {
    build_cartesian(n, n, DomainBox::unit(), boundary).unwrap()
}

#[test]
fn projection_of_aligned_half() {
    let m = unit(2, BoundaryKind::Periodic);
    let u = project_initial(&m, &InitialData::rectangle(0.0, 0.0, 0.5, 1.0), &SchemeConfig::default()).unwrap();
    // Row-major: cells 0 and 2 are on the left.
    assert_eq!(u.values, vec![1.0, 0.0, 1.0, 0.0]);
}

#[test]
fn projection_of_half_covered_cells() {
    let m = unit(2, BoundaryKind::Periodic);
    let u = project_initial(&m, &InitialData::rectangle(0.0, 0.0, 0.25, 1.0), &SchemeConfig::default()).unwrap();
    assert_eq!(u.values, vec![0.5, 0.0, 0.5, 0.0]);
}

#[test]
fn projection_conserves_clipped_area() {
    let mut quarter = vec![Vec2::new(0.0, 0.0)];
    let k = 200;
    for i in 0..=k {
        let th = std::f64::consts::FRAC_PI_2 * i as f64 / k as f64;
        quarter.push(Vec2::new(0.9 * th.cos(), 0.9 * th.sin()));
    }
    let area = signed_area(&quarter);
    let m = build_perturbed_cartesian(37, 41, DomainBox::unit(), BoundaryKind::Impermeable, 0.3, 3).unwrap();
    let u = project_initial(&m, &InitialData::indicator(vec![quarter]), &SchemeConfig::default()).unwrap();
    let mass: f64 = crate::sum::compensated_sum(m.cells.iter().zip(&u.values).map(|(c, v)| c.area * v));
    assert!((mass - area).abs() < 1e-12, "{mass} vs {area}");
    let worst = u.values.iter().map(|&v| (-v).max(v - 1.0)).fold(0.0, f64::max);
    assert!(worst < 1e-13, "{worst}");
}

#[test]
fn sampled_projection_converges_to_clipped() {
    let m = unit(8, BoundaryKind::Periodic);
    let data = InitialData::rectangle(0.13, 0.21, 0.61, 0.77);
    let exact = project_initial(&m, &data, &SchemeConfig::default()).unwrap();
    let err = |k| {
        let cfg = SchemeConfig {
            projection: ProjectionMode::Sampled(k),
            ..SchemeConfig::default()
        };
        let s = project_initial(&m, &data, &cfg).unwrap();
        s.values.iter().zip(&exact.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    assert!(err(32) < err(4));
    assert!(err(32) < 0.05);
}

#[test]
fn piecewise_constant_projection() {
    let m = build_perturbed_cartesian(6, 6, DomainBox::unit(), BoundaryKind::Periodic, 0.3, 2).unwrap();
    let grid = AuxGrid {
        nx: 4,
        ny: 4,
        domain: DomainBox::unit(),
    };
    let values: Vec<f64> = (0..16).map(|i| (i % 3) as f64).collect();
    let data = InitialData::PiecewiseConstant {
        grid: grid.clone(),
        values: values.clone(),
    };
    let u = project_initial(&m, &data, &SchemeConfig::default()).unwrap();
    let mass: f64 = m.cells.iter().zip(&u.values).map(|(c, v)| c.area * v).sum();
    let expected: f64 = values.iter().sum::<f64>() / 16.0;
    assert!((mass - expected).abs() < 1e-14);
}

#[test]
fn projection_rejects_polygon_outside_domain() {
    let m = unit(2, BoundaryKind::Periodic);
    let err = project_initial(&m, &InitialData::rectangle(0.5, 0.5, 1.5, 0.9), &SchemeConfig::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
    let overlapping = InitialData::indicator(vec![
        vec![Vec2::new(0.1, 0.1), Vec2::new(0.5, 0.1), Vec2::new(0.5, 0.5)],
        vec![Vec2::new(0.2, 0.1), Vec2::new(0.6, 0.1), Vec2::new(0.6, 0.5)],
    ]);
    assert!(project_initial(&m, &overlapping, &SchemeConfig::default()).is_err());
    let touching = InitialData::indicator(vec![
        vec![Vec2::new(0.1, 0.1), Vec2::new(0.5, 0.1), Vec2::new(0.5, 0.5), Vec2::new(0.1, 0.5)],
        vec![Vec2::new(0.5, 0.1), Vec2::new(0.9, 0.1), Vec2::new(0.9, 0.5), Vec2::new(0.5, 0.5)],
    ]);
    assert!(project_initial(&m, &touching, &SchemeConfig::default()).is_ok());
}

#[test]
fn cfl_bounds() {
    let m = unit(10, BoundaryKind::Periodic);
    let cfg = SchemeConfig {
        xi: 0.1,
        c0: f64::INFINITY,
        ..SchemeConfig::default()
    };
    let ts = cfl_timestep(&m, &VelocityField::uniform(1.0, 0.0), &cfg, 1.0).unwrap();
    assert!((ts.cfl_bound - 0.09).abs() < 1e-15);
    assert!(ts.dt <= ts.cfl_bound);
    assert!((ts.dt * ts.steps as f64 - 1.0).abs() < 1e-15);
    assert_eq!(ts.steps, 12);

    let ts = cfl_timestep(&m, &VelocityField::uniform(1.0, 1.0), &cfg, 1.0).unwrap();
    assert!((ts.cfl_bound - 0.045).abs() < 1e-15);

    let h = 2f64.sqrt() / 10.0;
    let cfg = SchemeConfig { c0: 0.05 / h, ..cfg };
    let ts = cfl_timestep(&m, &VelocityField::uniform(1.0, 0.0), &cfg, 1.0).unwrap();
    assert!((ts.c0_bound - 0.05).abs() < 1e-15);
    assert!((ts.dt - 0.05).abs() < 1e-15);
    assert_eq!(ts.steps, 20);
}

#[test]
fn cfl_zero_velocity() {
    let m = unit(4, BoundaryKind::Impermeable);
    let cfg = SchemeConfig {
        c0: f64::INFINITY,
        ..SchemeConfig::default()
    };
    let ts = cfl_timestep(&m, &VelocityField::cellular(0.0), &cfg, 0.3).unwrap();
    assert_eq!((ts.dt, ts.steps), (0.3, 1));
    let cfg = SchemeConfig { c0: 0.5, ..cfg };
    let ts = cfl_timestep(&m, &VelocityField::cellular(0.0), &cfg, 0.3).unwrap();
    let c0h = 0.5 * 2f64.sqrt() / 4.0;
    assert_eq!(ts.steps, (0.3 / c0h).ceil() as usize);
}

#[test]
fn config_bounds() {
    let bad = SchemeConfig {
        xi: 1.0,
        ..SchemeConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = SchemeConfig {
        c0: 0.0,
        ..SchemeConfig::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn single_inflow_half_weight() {
    let m = build_cartesian(2, 1, DomainBox::unit(), BoundaryKind::Periodic).unwrap();
    let f = edge_time_flux(&m, &VelocityField::uniform(1.0, 0.0), 0, 0.25).unwrap();
    let u = GridFunction::new(vec![1.0, 0.0], 0, 0.0);
    let next = upwind_step(&m, &u, &f, 0.25, 0.0).unwrap();
    assert_eq!(next.values, vec![0.5, 0.5]);
    assert_eq!(next.step, 1);
}

#[test]
fn constants_are_preserved() {
    let m = build_perturbed_cartesian(9, 7, DomainBox::unit(), BoundaryKind::Impermeable, 0.4, 8).unwrap();
    let field = VelocityField::cellular(1.0);
    let ts = cfl_timestep(&m, &field, &SchemeConfig::default(), 0.2).unwrap();
    let f = edge_time_flux(&m, &field, 0, ts.dt).unwrap();
    let u = GridFunction::new(vec![0.7; m.num_cells()], 0, 0.0);
    let next = upwind_step(&m, &u, &f, ts.dt, 0.1).unwrap();
    assert!(next.values.iter().all(|&v| (v - 0.7).abs() < 1e-15));
}

#[test]
fn unit_cfl_is_an_exact_shift() {
    let n = 16;
    let m = unit(n, BoundaryKind::Periodic);
    let dt = 1.0 / n as f64;
    let f = edge_time_flux(&m, &VelocityField::uniform(1.0, 0.0), 0, dt).unwrap();
    let vals: Vec<f64> = (0..n * n).map(|k| ((k * 7919) % 13) as f64 / 13.0).collect();
    let u = GridFunction::new(vals.clone(), 0, 0.0);
    let next = upwind_step(&m, &u, &f, dt, 0.0).unwrap();
    for j in 0..n {
        for i in 0..n {
            let west = j * n + (i + n - 1) % n;
            assert!((next.values[j * n + i] - vals[west]).abs() <= 1e-15);
        }
    }
}

#[test]
fn cfl_violation_names_cell() {
    let m = build_cartesian(2, 1, DomainBox::unit(), BoundaryKind::Periodic).unwrap();
    let f = edge_time_flux(&m, &VelocityField::uniform(1.0, 0.0), 0, 0.6).unwrap();
    let u = GridFunction::new(vec![1.0, 0.0], 3, 0.0);
    match upwind_step(&m, &u, &f, 0.6, 0.0) {
        Err(Error::CflViolation { step, cell, .. }) => {
            assert_eq!((step, cell), (3, 0));
        }
        other => panic!("expected CFL refusal, got {other:?}"),
    }
    // ξ tightens the limit.
    let f = edge_time_flux(&m, &VelocityField::uniform(1.0, 0.0), 0, 0.48).unwrap();
    assert!(upwind_step(&m, &u, &f, 0.48, 0.1).is_err());
    assert!(upwind_step(&m, &u, &f, 0.48, 0.0).is_ok());
}

#[test]
fn one_step_run_keeps_initial_and_final() {
    let m = unit(8, BoundaryKind::Periodic);
    let cfg = SchemeConfig::default();
    let field = VelocityField::uniform(1.0, 0.0);
    let ts = cfl_timestep(&m, &field, &cfg, 1.0).unwrap();
    let out = run_to_time(&m, &field, &InitialData::rectangle(0.25, 0.25, 0.5, 0.5), &cfg, ts.cfl_bound * 0.5, &[], None).unwrap();
    assert_eq!(out.timestep.steps, 1);
    assert_eq!(out.snapshots.len(), 2);
    assert_eq!(out.report.records.len(), 2);
}

#[test]
fn zero_amplitude_field_leaves_data_unchanged() {
    let m = build_perturbed_cartesian(12, 12, DomainBox::unit(), BoundaryKind::Impermeable, 0.3, 4).unwrap();
    let data = InitialData::rectangle(0.2, 0.3, 0.7, 0.6);
    let out = run_to_time(&m, &VelocityField::cellular(0.0), &data, &SchemeConfig::default(), 0.7, &[], None).unwrap();
    assert!(out.timestep.steps > 1);
    assert_eq!(out.initial().values, out.last().values);
}

#[test]
fn full_period_keeps_mass() {
    let m = unit(64, BoundaryKind::Periodic);
    let data = InitialData::rectangle(0.25, 0.25, 0.5, 0.5);
    let out = run_to_time(&m, &VelocityField::uniform(1.0, 0.0), &data, &SchemeConfig::default(), 1.0, &[0.5], None).unwrap();
    assert_eq!(out.snapshots.len(), 3);
    let r0 = out.report.records[0];
    let r1 = *out.report.records.last().unwrap();
    assert!((r0.mass - r1.mass).abs() <= 1e-12 * r0.mass);
    assert!(r1.max < 1.0);
    assert!(out.last().values != out.initial().values);
    // Smeared but centered: the centroid in y is unchanged.
    let cy = |u: &GridFunction| -> f64 { m.cells.iter().zip(&u.values).map(|(c, v)| c.area * v * c.centroid.y).sum::<f64>() };
    assert!((cy(out.initial()) - cy(out.last())).abs() < 1e-12);
}

#[test]
fn observer_sees_every_step() {
    let m = unit(8, BoundaryKind::Periodic);
    let mut count = 0;
    let mut obs = |v: &StepView<'_>| {
        assert_eq!(v.after.step, v.before.step + 1);
        count += 1;
    };
    let out = run_to_time(
        &m,
        &VelocityField::uniform(0.5, 0.25),
        &InitialData::rectangle(0.1, 0.1, 0.3, 0.4),
        &SchemeConfig::default(),
        0.4,
        &[],
        Some(&mut obs),
    )
    .unwrap();
    assert_eq!(count, out.timestep.steps);
}

#[test]
fn grid_function_round_trip() {
    let u = GridFunction::new(vec![0.1, 1.0 / 3.0, -2.5e-300, 7.0], 4, 0.123456789);
    let mut buf = Vec::new();
    write_grid_function(&u, &mut buf).unwrap();
    let back = read_grid_function(buf.as_slice()).unwrap();
    assert_eq!(back.values, u.values);
    assert_eq!(back.time, u.time);
    assert!(String::from_utf8(buf).unwrap().starts_with("gridfn v1 4 1.2345678900000000e-1\n"));
}

fn random_setup(n: usize, seed: u64, omega: f64) -> (Mesh, FluxSchedule, f64) {
    let m = build_perturbed_cartesian(n, n, DomainBox::unit(), BoundaryKind::Impermeable, 0.35, seed).unwrap();
    let field = VelocityField::cellular(1.0).with_time(TimeFactor::Cosine { omega });
    let cfg = SchemeConfig {
        xi: 0.05,
        ..SchemeConfig::default()
    };
    let ts = cfl_timestep(&m, &field, &cfg, 1.0).unwrap();
    let s = FluxSchedule::new(&m, &field, ts.dt).unwrap();
    (m, s, ts.dt)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stability_and_conservation(
        n in 3usize..10,
        seed in any::<u64>(),
        omega in 0.0f64..6.0,
        vals in proptest::collection::vec(-2.0f64..3.0, 100),
    ) {
        let (m, s, dt) = random_setup(n, seed, omega);
        let u0 = GridFunction::new(vals[..m.num_cells()].to_vec(), 0, 0.0);
        let (_, report) = evolve(&m, &s, u0, 15, 0.05, &[], None).unwrap();
        prop_assert!(dt > 0.0);
        prop_assert!(report.relative_mass_drift() <= 1e-12);
        prop_assert!(report.bound_excursion() <= 1e-14);
        prop_assert!(report.max_l1_increase() <= 1e-12);
        prop_assert!(report.max_l2_increase() <= 1e-12);
    }

    #[test]
    fn order_preserving_and_linear(
        n in 3usize..9,
        seed in any::<u64>(),
        step in 0usize..40,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        u in proptest::collection::vec(-1.0f64..1.0, 81),
        gap in proptest::collection::vec(0.0f64..1.0, 81),
    ) {
        let (m, s, dt) = random_setup(n, seed, 2.0);
        let nc = m.num_cells();
        let f = s.at_step(step);
        let gu = GridFunction::new(u[..nc].to_vec(), step, 0.0);
        let gv = GridFunction::new(u[..nc].iter().zip(&gap).map(|(x, g)| x + g).collect(), step, 0.0);
        let su = upwind_step(&m, &gu, &f, dt, 0.05).unwrap();
        let sv = upwind_step(&m, &gv, &f, dt, 0.05).unwrap();
        for (x, y) in su.values.iter().zip(&sv.values) {
            prop_assert!(x <= y);
        }
        let combo = GridFunction::new(gu.values.iter().zip(&gv.values).map(|(x, y)| a * x + b * y).collect(), step, 0.0);
        let sc = upwind_step(&m, &combo, &f, dt, 0.05).unwrap();
        let scale = su.values.iter().chain(&sv.values).fold(0.0f64, |m, v| m.max(v.abs())) * (a.abs() + b.abs());
        for k in 0..nc {
            let lin = a * su.values[k] + b * sv.values[k];
            prop_assert!((sc.values[k] - lin).abs() <= 1e-12 * scale.max(1e-300));
        }
    }
}
