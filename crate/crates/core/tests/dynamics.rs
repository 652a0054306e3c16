use chemowave::{
    run, sample, BoundaryCase, Grid, GrowthProfile, InitialCondition, OutcomeKind, RunConfig,
    SimParams,
};

fn exp1_config(t_end: f64) -> RunConfig {
    let params = SimParams::new(0.1, 1.0, 0.05, 1.0, 1.0).unwrap();
    let grid = Grid::new(20.0, 0.1).unwrap();
    RunConfig::new(
        params,
        &GrowthProfile::separated(),
        grid,
        BoundaryCase::Case1,
        0.002,
        t_end,
    )
    .unwrap()
}

#[test]
fn large_data_is_pulled_under_the_absorbing_level() {
    let cfg = exp1_config(10.0);
    let level = cfg.params.upper_level(cfg.r_star);
    let u0 = vec![3.0 * level; cfg.grid.len()];
    let res = run(&cfg, &u0).unwrap();
    assert!(
        res.trajectory.last.sup() <= level * 1.001,
        "{}",
        res.trajectory.last.sup()
    );
}

#[test]
fn solutions_stay_nonnegative_and_bounded() {
    let cfg = exp1_config(5.0).with_snapshots(&[1.0, 2.5, 5.0]).unwrap();
    let level = cfg.params.upper_level(cfg.r_star);
    let u0 = sample(&InitialCondition::ramp(10.0, 1.0), &cfg.grid);
    let res = run(&cfg, &u0).unwrap();
    assert!(res.trajectory.max_sup <= level + 1e-9);
    for snap in &res.trajectory.snapshots {
        assert!(snap.u.iter().all(|&x| x >= 0.0));
        assert!(snap.v.iter().all(|&x| x >= 0.0));
    }
}

#[test]
fn runs_are_bitwise_reproducible() {
    let cfg = exp1_config(2.0).with_snapshots(&[1.0, 2.0]).unwrap();
    let u0 = sample(&InitialCondition::ramp(10.0, 1.0), &cfg.grid);
    let a = run(&cfg, &u0).unwrap();
    let b = run(&cfg, &u0).unwrap();
    assert_eq!(a, b);
}

#[test]
fn experiment_one_settles_on_the_forced_wave() {
    let cfg = exp1_config(10.0);
    let u0 = sample(&InitialCondition::ramp(10.0, 1.0), &cfg.grid);
    let res = run(&cfg, &u0).unwrap();
    assert_eq!(res.outcome.kind, OutcomeKind::ForcedWaveCase1);
    assert!((res.outcome.u_at_right - 10.0).abs() < 0.2);
}

#[test]
fn dirichlet_run_with_fast_shift_dies_out() {
    let params = SimParams::new(0.6, 1.0, 1.0, 1.0, 6.5).unwrap();
    let grid = Grid::new(20.0, 0.1).unwrap();
    let cfg = RunConfig::new(
        params,
        &GrowthProfile::patch(),
        grid,
        BoundaryCase::Case2,
        0.002,
        30.0,
    )
    .unwrap();
    let u0 = sample(&InitialCondition::unit_bump(), &cfg.grid);
    let res = run(&cfg, &u0).unwrap();
    assert_eq!(res.outcome.kind, OutcomeKind::Extinction);
}
