//! Outer iteration `u_{n+1} = U*(u_n)`, where `U*(u)` is the long-time limit of
//! the scalar flow `U_t = A_u(U)` with the chemical of `u` frozen, started at
//! the upper envelope.

use super::envelope::{
    build_lower_envelope_case1, build_lower_envelope_case2, build_upper_envelope_case1,
    build_upper_envelope_case2, Envelope, LOWER_DAMPING_FACTOR,
};
use super::ignition::{ignition_wave, DEFAULT_TRUNCATION};
use crate::chemo::ChemicalSolver;
use crate::error::{Error, Result};
use crate::model::{sample, BoundaryCase, Grid, GrowthProfile, SimParams};
use crate::stepper::{apply_boundary, cfl_check, cfl_ratio, sup_diff, sup_norm, Scheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub tau: f64,
    pub max_outer: usize,
    pub outer_tol: f64,
    /// Horizon cap of each frozen evolution.
    pub inner_t: f64,
    pub inner_window: f64,
    pub inner_tol: f64,
    pub monotone_slack: f64,
    pub sandwich_slack: f64,
    /// Cut-off of the ignition wave behind the separated-habitat lower envelope.
    pub epsilon: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            tau: 0.002,
            max_outer: 30,
            outer_tol: 1e-4,
            inner_t: 50.0,
            inner_window: 1.0,
            inner_tol: 1e-4,
            monotone_slack: 1e-10,
            sandwich_slack: 1e-8,
            epsilon: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub u_star: Vec<f64>,
    pub converged: bool,
    pub outer_iterations: usize,
    /// `||u_{n+1} - u_n||_inf` per outer iteration.
    pub outer_diffs: Vec<f64>,
    /// Time each frozen evolution ran for.
    pub inner_times: Vec<f64>,
    /// Largest single-step increase seen in any frozen evolution.
    pub max_inner_increase: f64,
    /// Sup norm of the discrete stationary residual at `u_star`.
    pub residual_sup: f64,
    pub upper: Envelope,
    pub lower: Option<Envelope>,
}

impl FixedPointReport {
    pub fn inner_monotone(&self, slack: f64) -> bool {
        self.max_inner_increase <= slack
    }
}

fn envelopes(
    params: &SimParams,
    profile: &GrowthProfile,
    grid: &Grid,
    bc: BoundaryCase,
    cfg: &FixedPointConfig,
) -> Result<(Envelope, Option<Envelope>)> {
    match bc {
        BoundaryCase::Case1 => {
            let upper = build_upper_envelope_case1(params, profile, grid, None)?;
            let lower = ignition_wave(params, profile.r_star(), cfg.epsilon, DEFAULT_TRUNCATION)
                .and_then(|w| build_lower_envelope_case1(params, profile, grid, &w, &upper));
            match lower {
                Ok(l) => Ok((upper, Some(l))),
                Err(e) => {
                    log::warn!("no lower envelope: {e}");
                    Ok((upper, None))
                }
            }
        }
        BoundaryCase::Case2 => {
            let upper = build_upper_envelope_case2(params, profile, grid, None)?;
            let lower = build_lower_envelope_case2(
                params,
                profile,
                grid,
                &upper,
                cfg.tau,
                30.0,
                LOWER_DAMPING_FACTOR,
            );
            match lower {
                Ok(l) => Ok((upper, Some(l))),
                Err(e) if e.is_numerical() => Err(e),
                Err(e) => {
                    log::warn!("no lower envelope: {e}");
                    Ok((upper, None))
                }
            }
        }
    }
}

struct FrozenFlow<'a> {
    scheme: Scheme,
    r: &'a [f64],
    bc: BoundaryCase,
    window: usize,
    max_steps: usize,
    tol: f64,
    tau: f64,
}

struct InnerResult {
    u: Vec<f64>,
    time: f64,
    max_increase: f64,
}

impl FrozenFlow<'_> {
    fn evolve(&self, start: &[f64], v: &[f64], vx: &[f64]) -> InnerResult {
        let mut u = start.to_vec();
        let mut next = u.clone();
        let mut anchor = u.clone();
        let mut max_increase = f64::NEG_INFINITY;
        let mut steps = 0;
        while steps < self.max_steps {
            self.scheme.advance(&u, v, vx, self.r, &mut next);
            apply_boundary(&mut next, self.bc);
            let inc = next
                .iter()
                .zip(&u)
                .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
            max_increase = max_increase.max(inc);
            std::mem::swap(&mut u, &mut next);
            steps += 1;
            if steps % self.window == 0 {
                if sup_diff(&u, &anchor) < self.tol {
                    break;
                }
                anchor.copy_from_slice(&u);
            }
        }
        InnerResult {
            u,
            time: steps as f64 * self.tau,
            max_increase,
        }
    }
}

fn check_sandwich(
    u: &[f64],
    upper: &Envelope,
    lower: Option<&Envelope>,
    slack: f64,
    grid: &Grid,
    bc: BoundaryCase,
) -> Result<()> {
    let m = grid.cells();
    for (i, &val) in u.iter().enumerate() {
        // boundary nodes carry the truncation's conditions, not the envelopes'
        let on_dirichlet = i == 0 || (i == m && bc == BoundaryCase::Case2);
        if val > upper.values[i] + slack {
            return Err(Error::SandwichViolation {
                x: grid.x(i),
                detail: format!("iterate {val} above upper envelope {}", upper.values[i]),
            });
        }
        if let Some(lo) = lower {
            if !on_dirichlet && val < lo.values[i] - slack {
                return Err(Error::SandwichViolation {
                    x: grid.x(i),
                    detail: format!("iterate {val} below lower envelope {}", lo.values[i]),
                });
            }
        }
    }
    Ok(())
}

/// Discrete stationary residual `(S(u) - u)/tau` of the coupled scheme on the interior.
pub fn stationary_residual(
    u: &[f64],
    params: &SimParams,
    profile: &GrowthProfile,
    grid: &Grid,
    bc: BoundaryCase,
    tau: f64,
) -> Result<f64> {
    let solver = ChemicalSolver::new(grid, params.nu, params.mu, bc)?;
    let chem = solver.solve(u);
    let r = sample(profile, grid);
    let scheme = Scheme::new(params, grid.h(), tau);
    let mut next = u.to_vec();
    scheme.advance(u, &chem.v, &chem.vx, &r, &mut next);
    let m = grid.cells();
    Ok((1..m)
        .map(|i| ((next[i] - u[i]) / tau).abs())
        .fold(0.0, f64::max))
}

pub fn frozen_flow_fixed_point(
    params: &SimParams,
    profile: &GrowthProfile,
    grid: &Grid,
    bc: BoundaryCase,
    cfg: &FixedPointConfig,
) -> Result<FixedPointReport> {
    params.require_bounded()?;
    if !cfl_check(grid.h(), cfg.tau) {
        return Err(Error::CflViolated {
            ratio: cfl_ratio(grid.h(), cfg.tau),
        });
    }
    if cfg.max_outer == 0 {
        return Err(Error::param("max_outer", "must be >= 1"));
    }
    let (upper, lower) = envelopes(params, profile, grid, bc, cfg)?;
    let r = sample(profile, grid);
    let solver = ChemicalSolver::new(grid, params.nu, params.mu, bc)?;
    let flow = FrozenFlow {
        scheme: Scheme::new(params, grid.h(), cfg.tau),
        r: &r,
        bc,
        window: ((cfg.inner_window / cfg.tau).round() as usize).max(1),
        max_steps: (cfg.inner_t / cfg.tau).round() as usize,
        tol: cfg.inner_tol,
        tau: cfg.tau,
    };
    let mut start = upper.values.clone();
    apply_boundary(&mut start, bc);

    let mut u = start.clone();
    let mut outer_diffs = Vec::new();
    let mut inner_times = Vec::new();
    let mut max_inc = f64::NEG_INFINITY;
    let mut converged = false;
    for n in 0..cfg.max_outer {
        let chem = solver.solve(&u);
        let inner = flow.evolve(&start, &chem.v, &chem.vx);
        max_inc = max_inc.max(inner.max_increase);
        inner_times.push(inner.time);
        check_sandwich(
            &inner.u,
            &upper,
            lower.as_ref(),
            cfg.sandwich_slack,
            grid,
            bc,
        )?;
        let diff = sup_diff(&inner.u, &u);
        log::debug!("outer {n}: diff {diff:e}, inner time {}", inner.time);
        outer_diffs.push(diff);
        u = inner.u;
        if !(sup_norm(&u).is_finite()) {
            return Err(Error::BlowUp {
                t: inner.time,
                sup: sup_norm(&u),
            });
        }
        if diff < cfg.outer_tol {
            converged = true;
            break;
        }
    }
    let residual_sup = stationary_residual(&u, params, profile, grid, bc, cfg.tau)?;
    Ok(FixedPointReport {
        outer_iterations: outer_diffs.len(),
        u_star: u,
        converged,
        outer_diffs,
        inner_times,
        max_inner_increase: max_inc,
        residual_sup,
        upper,
        lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_iteration_repeats_itself() {
        let params = SimParams::new(0.0, 1.0, 0.05, 1.0, 1.0).unwrap();
        let grid = Grid::new(10.0, 0.1).unwrap();
        let cfg = FixedPointConfig {
            inner_t: 10.0,
            ..Default::default()
        };
        let rep = frozen_flow_fixed_point(
            &params,
            &GrowthProfile::separated(),
            &grid,
            BoundaryCase::Case1,
            &cfg,
        )
        .unwrap();
        assert!(rep.converged);
        assert_eq!(rep.outer_iterations, 2);
        assert!(rep.outer_diffs[1] < 1e-6);
        assert!(rep.inner_monotone(1e-10));
    }
}
