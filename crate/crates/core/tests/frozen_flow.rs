use chemowave::analysis::{frozen_flow_fixed_point, FixedPointConfig};
use chemowave::{run, BoundaryCase, Grid, GrowthProfile, RunConfig, SimParams};

#[test]
fn experiment_one_fixed_point_is_a_stationary_wave() {
    let params = SimParams::new(0.1, 1.0, 0.05, 1.0, 1.0).unwrap();
    let profile = GrowthProfile::separated();
    let grid = Grid::new(20.0, 0.1).unwrap();
    let fp = FixedPointConfig::default();
    let rep = frozen_flow_fixed_point(&params, &profile, &grid, BoundaryCase::Case1, &fp).unwrap();
    assert!(rep.converged, "{:?}", rep.outer_diffs);
    assert!(rep.outer_iterations <= 30);
    assert!(rep.inner_monotone(1e-10), "{}", rep.max_inner_increase);
    assert!((rep.u_star.last().unwrap() - 10.0).abs() < 0.2);
    let norm = rep.u_star.iter().fold(0.0f64, |m, x| m.max(*x));
    assert!(rep.residual_sup <= 1e-3 * norm, "{}", rep.residual_sup);

    let cfg = RunConfig::new(params, &profile, grid, BoundaryCase::Case1, fp.tau, 5.0).unwrap();
    let res = run(&cfg, &rep.u_star).unwrap();
    let drift = res
        .trajectory
        .last
        .u
        .iter()
        .zip(&rep.u_star)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(drift < 1e-3, "{drift}");
}

#[test]
fn dirichlet_fixed_point_stays_between_envelopes() {
    let params = SimParams::new(0.1, 1.0, 1.0, 1.0, 1.0).unwrap();
    let profile = GrowthProfile::patch();
    let grid = Grid::new(20.0, 0.1).unwrap();
    let fp = FixedPointConfig::default();
    let rep = frozen_flow_fixed_point(&params, &profile, &grid, BoundaryCase::Case2, &fp).unwrap();
    assert!(rep.lower.is_some());
    assert!(rep.inner_monotone(1e-10));
    assert!(rep.converged, "{:?}", rep.outer_diffs);
}

#[test]
fn strong_chemotaxis_breaks_the_sandwich_loudly() {
    // b < 2 chi mu: the cap's chemical wipes out the first inner flow
    let params = SimParams::new(0.6, 1.0, 1.0, 1.0, 1.0).unwrap();
    let grid = Grid::new(20.0, 0.1).unwrap();
    let res = frozen_flow_fixed_point(
        &params,
        &GrowthProfile::patch(),
        &grid,
        BoundaryCase::Case2,
        &FixedPointConfig::default(),
    );
    assert!(matches!(
        res,
        Err(chemowave::Error::SandwichViolation { .. })
    ));
}
