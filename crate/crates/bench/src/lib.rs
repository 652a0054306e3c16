//! Fixtures shared by the benchmarks.

use chemowave::{
    sample, BoundaryCase, Grid, GrowthProfile, InitialCondition, RunConfig, SimParams,
};

/// Separated-habitat run: `b = 1`, `c = 1`, `chi = 0.1`, `nu = 0.05`, `tau = 0.002`.
pub fn case1_config(half_length: f64, h: f64, t_end: f64) -> RunConfig {
    let params = SimParams::new(0.1, 1.0, 0.05, 1.0, 1.0).expect("params");
    let grid = Grid::new(half_length, h).expect("grid");
    let tau = 0.2 * h * h;
    RunConfig::new(
        params,
        &GrowthProfile::separated(),
        grid,
        BoundaryCase::Case1,
        tau,
        t_end,
    )
    .expect("config")
}

pub fn case1_density(grid: &Grid) -> Vec<f64> {
    sample(&InitialCondition::ramp(10.0, 1.0), grid)
}

/// A smooth bump of height 5 on `[-10, 10]`.
pub fn bump(grid: &Grid) -> Vec<f64> {
    sample(
        &InitialCondition::Bump {
            left: -10.0,
            right: 10.0,
            scale: 0.05,
        },
        grid,
    )
}
