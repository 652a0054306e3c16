//! Explicit time stepping of the truncated moving-frame problem.

use std::fmt;

use crate::chemo::{ChemicalField, ChemicalSolver, NeumannClosure};
use crate::error::{Error, Result};
use crate::model::{sample, BoundaryCase, Grid, GrowthProfile, SimParams};

pub const BLOW_UP_LIMIT: f64 = 1e6;

/// `tau / h^2 <= 1/2`.
pub fn cfl_check(h: f64, tau: f64) -> bool {
    cfl_ratio(h, tau) <= 0.5 * (1.0 + 1e-12)
}

pub fn cfl_ratio(h: f64, tau: f64) -> f64 {
    tau / (h * h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SimParams,
    pub grid: Grid,
    pub bc: BoundaryCase,
    pub tau: f64,
    /// Final time `T`.
    pub t_end: f64,
    /// `r(x_i)` at the grid nodes.
    pub r_samples: Vec<f64>,
    /// `sup r`, the scale of the plateau test.
    pub r_star: f64,
    pub snapshot_times: Vec<f64>,
    pub conv_window: f64,
    pub conv_tol: f64,
    pub extinct_tol: f64,
    pub plateau_rel_tol: f64,
    pub closure: NeumannClosure,
    pub allow_unstable: bool,
}

impl RunConfig {
    /// Configuration with the default tolerances and no snapshots.
    pub fn new(
        params: SimParams,
        profile: &GrowthProfile,
        grid: Grid,
        bc: BoundaryCase,
        tau: f64,
        t_end: f64,
    ) -> Result<Self> {
        let cfg = RunConfig {
            params,
            grid,
            bc,
            tau,
            t_end,
            r_samples: sample(profile, &grid),
            r_star: profile.r_star(),
            snapshot_times: Vec::new(),
            conv_window: 1.0,
            conv_tol: 1e-3,
            extinct_tol: 1e-3,
            plateau_rel_tol: 0.02,
            closure: NeumannClosure::FirstOrder,
            allow_unstable: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_snapshots(mut self, times: &[f64]) -> Result<Self> {
        self.snapshot_times = times.to_vec();
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::param("tau", "must be > 0"));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.tau) {
            return Err(Error::param("T", "must be >= tau"));
        }
        let steps = self.t_end / self.tau;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::param(
                "T",
                format!("T / tau = {steps} is not an integer"),
            ));
        }
        for (name, v) in [
            ("conv_window", self.conv_window),
            ("conv_tol", self.conv_tol),
            ("extinct_tol", self.extinct_tol),
            ("plateau_rel_tol", self.plateau_rel_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be > 0"));
            }
        }
        if self.r_samples.len() != self.grid.len() {
            return Err(Error::InvalidGrid(format!(
                "growth samples have {} entries, grid has {} nodes",
                self.r_samples.len(),
                self.grid.len()
            )));
        }
        if let Some(&t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(0.0..=self.t_end * (1.0 + 1e-12)).contains(&t))
        {
            return Err(Error::param(
                "snapshot_times",
                format!("{t} lies outside [0, T]"),
            ));
        }
        if !self.allow_unstable && !cfl_check(self.grid.h(), self.tau) {
            return Err(Error::CflViolated {
                ratio: cfl_ratio(self.grid.h(), self.tau),
            });
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        (self.t_end / self.tau).round() as usize
    }

    pub fn window_steps(&self) -> usize {
        ((self.conv_window / self.tau).round() as usize).max(1)
    }

    pub fn chemical_solver(&self) -> Result<ChemicalSolver> {
        ChemicalSolver::with_closure(
            &self.grid,
            self.params.nu,
            self.params.mu,
            self.bc,
            self.closure,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub step: usize,
    pub u: Vec<f64>,
    pub chem: ChemicalField,
}

impl State {
    /// Initial state: boundary values of `u0` are overwritten to satisfy the
    /// boundary conditions, and `v` is solved from `u0`.
    pub fn initial(cfg: &RunConfig, u0: &[f64]) -> Result<Self> {
        let solver = cfg.chemical_solver()?;
        Self::initial_with(cfg, &solver, u0)
    }

    fn initial_with(cfg: &RunConfig, solver: &ChemicalSolver, u0: &[f64]) -> Result<Self> {
        if u0.len() != cfg.grid.len() {
            return Err(Error::InvalidGrid(format!(
                "initial density has {} entries, grid has {} nodes",
                u0.len(),
                cfg.grid.len()
            )));
        }
        if let Some(i) = u0.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidProfile(format!(
                "initial density must be finite and nonnegative (node {i})"
            )));
        }
        let mut u = u0.to_vec();
        apply_boundary(&mut u, cfg.bc);
        let chem = solver.solve(&u);
        Ok(State {
            t: 0.0,
            step: 0,
            u,
            chem,
        })
    }

    pub fn sup(&self) -> f64 {
        sup_norm(&self.u)
    }
}

pub(crate) fn apply_boundary(u: &mut [f64], bc: BoundaryCase) {
    let m = u.len() - 1;
    u[0] = 0.0;
    u[m] = match bc {
        BoundaryCase::Case1 => u[m - 1],
        BoundaryCase::Case2 => 0.0,
    };
}

pub fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Coefficients of the explicit update that do not depend on the state.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scheme {
    pub lambda: f64,
    pub half_ratio: f64,
    pub tau: f64,
    pub c: f64,
    pub chi: f64,
    pub chi_nu: f64,
    pub damping: f64,
}

impl Scheme {
    pub fn new(params: &SimParams, h: f64, tau: f64) -> Self {
        Scheme {
            lambda: tau / (h * h),
            half_ratio: tau / (2.0 * h),
            tau,
            c: params.c,
            chi: params.chi,
            chi_nu: params.chi * params.nu,
            damping: params.net_damping(),
        }
    }

    /// Interior update `out[i]`, `i = 1..M-1`, from `u`, `v` and `v_x`.
    /// Returns the smallest value produced before clamping.
    pub fn advance(&self, u: &[f64], v: &[f64], vx: &[f64], r: &[f64], out: &mut [f64]) -> f64 {
        let m = u.len() - 1;
        let mut lowest = f64::INFINITY;
        for i in 1..m {
            let a = self.c - self.chi * vx[i];
            let west = self.lambda - self.half_ratio * a;
            let east = self.lambda + self.half_ratio * a;
            let centre = 1.0 - 2.0 * self.lambda + self.tau * r[i] - self.tau * self.chi_nu * v[i];
            let ui = u[i];
            let next =
                west * u[i - 1] + centre * ui - self.tau * self.damping * ui * ui + east * u[i + 1];
            lowest = lowest.min(next);
            out[i] = next.max(0.0);
        }
        lowest
    }
}

/// Reusable stepping workspace for one configuration.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    cfg: &'a RunConfig,
    solver: ChemicalSolver,
    scheme: Scheme,
    next: Vec<f64>,
    lowest: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Stepper {
            cfg,
            solver: cfg.chemical_solver()?,
            scheme: Scheme::new(&cfg.params, cfg.grid.h(), cfg.tau),
            next: vec![0.0; cfg.grid.len()],
            lowest: 0.0,
        })
    }

    pub fn initial_state(&self, u0: &[f64]) -> Result<State> {
        State::initial_with(self.cfg, &self.solver, u0)
    }

    /// Smallest pre-clamp value produced by any step so far (0 if none was negative).
    pub fn lowest_value(&self) -> f64 {
        self.lowest
    }

    /// Advances `state` by one time step in place.
    pub fn step(&mut self, state: &mut State) -> Result<()> {
        let low = self.scheme.advance(
            &state.u,
            &state.chem.v,
            &state.chem.vx,
            &self.cfg.r_samples,
            &mut self.next,
        );
        self.lowest = self.lowest.min(low);
        apply_boundary(&mut self.next, self.cfg.bc);
        std::mem::swap(&mut state.u, &mut self.next);
        state.step += 1;
        state.t = state.step as f64 * self.cfg.tau;
        let sup = sup_norm(&state.u);
        if !(sup <= BLOW_UP_LIMIT) {
            return Err(Error::BlowUp { t: state.t, sup });
        }
        self.solver.solve_into(&state.u, &mut state.chem);
        Ok(())
    }
}

/// One explicit step; allocates a fresh workspace, so prefer [`Stepper`] in loops.
pub fn step(state: &State, cfg: &RunConfig) -> Result<State> {
    let mut stepper = Stepper::new(cfg)?;
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub t: f64,
    /// `||u(t) - u(t - window)||_inf`.
    pub sup_diff: f64,
    pub sup_u: f64,
    pub u_at_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<ConvergenceRow>,
    /// Last state reached (the terminal state on success).
    pub last: State,
    /// `u` one convergence window before the last state.
    pub window_start: Vec<f64>,
    /// Smallest value produced by the scheme before clamping.
    pub lowest_value: f64,
    /// Largest sup norm seen over the run.
    pub max_sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    ForcedWaveCase1,
    ForcedWaveCase2,
    Extinction,
    Undetermined,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::ForcedWaveCase1 => "forced_wave_case1",
            OutcomeKind::ForcedWaveCase2 => "forced_wave_case2",
            OutcomeKind::Extinction => "extinction",
            OutcomeKind::Undetermined => "undetermined",
        })
    }
}

impl std::str::FromStr for OutcomeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forced_wave_case1" => Ok(OutcomeKind::ForcedWaveCase1),
            "forced_wave_case2" => Ok(OutcomeKind::ForcedWaveCase2),
            "extinction" => Ok(OutcomeKind::Extinction),
            "undetermined" => Ok(OutcomeKind::Undetermined),
            other => Err(Error::param(
                "outcome",
                format!("unknown outcome `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub kind: OutcomeKind,
    /// `u(T, L)`, present for the separated-habitat forced wave.
    pub plateau: Option<f64>,
    /// `(max u(T, .), argmax)` for Dirichlet-Dirichlet runs.
    pub peak: Option<(f64, f64)>,
    pub final_sup_diff: f64,
    pub final_sup_u: f64,
    /// `u(T, L)` regardless of the outcome.
    pub u_at_right: f64,
}

/// Classifies a terminal state against the state one window earlier.
pub fn detect_outcome(u_final: &[f64], u_window_start: &[f64], cfg: &RunConfig) -> Outcome {
    let sup = sup_norm(u_final);
    let diff = sup_diff(u_final, u_window_start);
    let right = *u_final.last().unwrap();
    let (peak_idx, peak_val) =
        u_final
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, x)| {
                if x > best.1 {
                    (i, x)
                } else {
                    best
                }
            });
    let b = cfg.params.b;
    let kind = if sup < cfg.extinct_tol {
        OutcomeKind::Extinction
    } else if diff < cfg.conv_tol {
        match cfg.bc {
            BoundaryCase::Case1 if (right * b / cfg.r_star - 1.0).abs() < cfg.plateau_rel_tol => {
                OutcomeKind::ForcedWaveCase1
            }
            BoundaryCase::Case2 if peak_val > 10.0 * cfg.extinct_tol => {
                OutcomeKind::ForcedWaveCase2
            }
            _ => OutcomeKind::Undetermined,
        }
    } else {
        OutcomeKind::Undetermined
    };
    Outcome {
        kind,
        plateau: (kind == OutcomeKind::ForcedWaveCase1).then_some(right),
        peak: (cfg.bc == BoundaryCase::Case2).then(|| (peak_val, cfg.grid.x(peak_idx))),
        final_sup_diff: diff,
        final_sup_u: sup,
        u_at_right: right,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trajectory: Trajectory,
    pub outcome: Outcome,
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Option<Box<Trajectory>>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.partial {
            Some(p) => write!(f, "{} (stopped at t = {})", self.error, p.last.t),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        RunFailure {
            error,
            partial: None,
        }
    }
}

// largest k <= 10 dividing the window, so probes land on window boundaries
fn probe_stride(window: usize) -> usize {
    let k = (1..=10.min(window))
        .rev()
        .find(|k| window.is_multiple_of(*k))
        .unwrap_or(1);
    window / k
}

/// Integrates from `u0` to `T`, recording snapshots and the convergence series.
pub fn run(cfg: &RunConfig, u0: &[f64]) -> std::result::Result<RunResult, RunFailure> {
    let mut stepper = Stepper::new(cfg)?;
    let mut state = stepper.initial_state(u0)?;
    let total = cfg.total_steps();
    let window = cfg.window_steps();
    let stride = probe_stride(window);
    let per_window = window / stride;

    let mut snap_steps: Vec<(usize, f64)> = cfg
        .snapshot_times
        .iter()
        .map(|&t| (((t / cfg.tau).round() as usize).min(total), t))
        .collect();
    snap_steps.sort_by_key(|a| a.0);
    snap_steps.dedup_by_key(|s| s.0);
    let mut next_snap = 0;

    // ring of probe states, one window deep
    let mut ring: std::collections::VecDeque<Vec<f64>> =
        std::collections::VecDeque::with_capacity(per_window + 1);
    ring.push_back(state.u.clone());
    let window_start_step = total.saturating_sub(window);
    let mut window_start = if window_start_step == 0 {
        Some(state.u.clone())
    } else {
        None
    };

    let mut traj = Trajectory {
        snapshots: Vec::new(),
        series: Vec::new(),
        last: state.clone(),
        window_start: Vec::new(),
        lowest_value: 0.0,
        max_sup: state.sup(),
    };
    let record_snapshot = |state: &State, traj: &mut Trajectory, next_snap: &mut usize| {
        while *next_snap < snap_steps.len() && snap_steps[*next_snap].0 == state.step {
            traj.snapshots.push(Snapshot {
                t: state.t,
                u: state.u.clone(),
                v: state.chem.v.clone(),
            });
            *next_snap += 1;
        }
    };
    record_snapshot(&state, &mut traj, &mut next_snap);

    for _ in 0..total {
        if let Err(error) = stepper.step(&mut state) {
            traj.lowest_value = stepper.lowest_value();
            traj.last = state;
            traj.window_start = window_start.unwrap_or_default();
            return Err(RunFailure {
                error,
                partial: Some(Box::new(traj)),
            });
        }
        let sup = state.sup();
        traj.max_sup = traj.max_sup.max(sup);
        record_snapshot(&state, &mut traj, &mut next_snap);
        if state.step == window_start_step {
            window_start = Some(state.u.clone());
        }
        if state.step % stride == 0 {
            if ring.len() == per_window + 1 {
                ring.pop_front();
            }
            ring.push_back(state.u.clone());
            if ring.len() == per_window + 1 {
                traj.series.push(ConvergenceRow {
                    t: state.t,
                    sup_diff: sup_diff(&state.u, &ring[0]),
                    sup_u: sup,
                    u_at_right: *state.u.last().unwrap(),
                });
            }
        }
    }
    let window_start = window_start.expect("window start recorded");
    let outcome = detect_outcome(&state.u, &window_start, cfg);
    traj.lowest_value = stepper.lowest_value();
    traj.last = state;
    traj.window_start = window_start;
    Ok(RunResult {
        trajectory: traj,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InitialCondition;

    #[test]
    fn cfl_examples() {
        assert!(cfl_check(0.1, 0.002));
        assert!(!cfl_check(0.1, 0.01));
        assert!(cfl_check(0.05, 0.00125));
    }

    #[test]
    fn hand_evaluated_single_node_step() {
        let params = SimParams::new(0.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let grid = Grid::new(1.0, 1.0).unwrap();
        let profile = GrowthProfile::constant(1.0);
        let mut cfg =
            RunConfig::new(params, &profile, grid, BoundaryCase::Case2, 0.1, 0.1).unwrap();
        cfg.allow_unstable = true;
        let s0 = State::initial(&cfg, &[0.0, 1.0, 0.0]).unwrap();
        let s1 = step(&s0, &cfg).unwrap();
        assert!((s1.u[1] - 0.8).abs() < 1e-15);
        assert_eq!(s1.u[0], 0.0);
        assert_eq!(s1.u[2], 0.0);
        assert!((s1.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_stays_zero() {
        let params = SimParams::new(0.1, 1.0, 0.05, 1.0, 1.0).unwrap();
        let grid = Grid::new(5.0, 0.1).unwrap();
        let cfg = RunConfig::new(
            params,
            &GrowthProfile::separated(),
            grid,
            BoundaryCase::Case1,
            0.002,
            1.0,
        )
        .unwrap();
        let res = run(&cfg, &vec![0.0; grid.len()]).unwrap();
        assert!(res.trajectory.last.u.iter().all(|&x| x == 0.0));
        assert_eq!(res.outcome.kind, OutcomeKind::Extinction);
    }

    #[test]
    fn unstable_step_is_refused_then_blows_up() {
        let params = SimParams::new(0.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let grid = Grid::new(5.0, 0.1).unwrap();
        let profile = GrowthProfile::constant(1.0);
        let err =
            RunConfig::new(params, &profile, grid, BoundaryCase::Case2, 0.01, 5.0).unwrap_err();
        assert!(matches!(err, Error::CflViolated { .. }));
        let mut cfg =
            RunConfig::new(params, &profile, grid, BoundaryCase::Case2, 0.002, 5.0).unwrap();
        cfg.tau = 0.01;
        cfg.allow_unstable = true;
        let u0 = sample(&InitialCondition::unit_bump(), &grid);
        let failure = run(&cfg, &u0).unwrap_err();
        assert!(matches!(failure.error, Error::BlowUp { .. }));
        let partial = failure.partial.unwrap();
        assert!(partial.last.t > 0.0 && partial.last.t < 5.0);
    }

    #[test]
    fn snapshots_and_series_are_recorded() {
        let params = SimParams::new(0.1, 1.0, 0.05, 1.0, 1.0).unwrap();
        let grid = Grid::new(5.0, 0.1).unwrap();
        let cfg = RunConfig::new(
            params,
            &GrowthProfile::separated(),
            grid,
            BoundaryCase::Case1,
            0.002,
            3.0,
        )
        .unwrap()
        .with_snapshots(&[0.0, 1.5, 3.0])
        .unwrap();
        let u0 = sample(&InitialCondition::ramp(10.0, 1.0), &grid);
        let res = run(&cfg, &u0).unwrap();
        let times: Vec<f64> = res.trajectory.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 3);
        assert!((times[1] - 1.5).abs() < 1e-12);
        assert!((times[2] - 3.0).abs() < 1e-12);
        let series = &res.trajectory.series;
        assert!((series[0].t - 1.0).abs() < 1e-12);
        assert!((series.last().unwrap().t - 3.0).abs() < 1e-12);
        let last = series.last().unwrap();
        assert_eq!(last.sup_diff, res.outcome.final_sup_diff);
        assert_eq!(res.trajectory.snapshots[2].u, res.trajectory.last.u);
    }

    #[test]
    fn probe_stride_divides_window() {
        assert_eq!(probe_stride(500), 50);
        assert_eq!(probe_stride(7), 1);
        assert_eq!(probe_stride(1), 1);
        assert_eq!(probe_stride(33), 11);
    }

    #[test]
    fn outcome_classification() {
        let params = SimParams::new(0.1, 1.0, 0.05, 1.0, 1.0).unwrap();
        let grid = Grid::new(2.0, 0.5).unwrap();
        let cfg = RunConfig::new(
            params,
            &GrowthProfile::separated(),
            grid,
            BoundaryCase::Case1,
            0.1,
            1.0,
        )
        .unwrap();
        let zero = vec![0.0; grid.len()];
        assert_eq!(
            detect_outcome(&zero, &zero, &cfg).kind,
            OutcomeKind::Extinction
        );
        let plateau = vec![0.0, 5.0, 9.9, 10.0, 10.0, 10.0, 10.0, 10.0, 10.1];
        let o = detect_outcome(&plateau, &plateau, &cfg);
        assert_eq!(o.kind, OutcomeKind::ForcedWaveCase1);
        assert_eq!(o.plateau, Some(10.1));
        let low = vec![0.0, 5.0, 9.9, 10.0, 10.0, 10.0, 10.0, 10.0, 9.0];
        assert_eq!(
            detect_outcome(&low, &low, &cfg).kind,
            OutcomeKind::Undetermined
        );
        let moved: Vec<f64> = plateau.iter().map(|x| x * 0.999).collect();
        let o = detect_outcome(&plateau, &moved, &cfg);
        assert_eq!(o.kind, OutcomeKind::Undetermined);
        assert_eq!(o.plateau, None);
    }
}
