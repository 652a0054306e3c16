//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chemowave::analysis::{
    build_upper_envelope_case1, build_upper_envelope_case2, certify_greens_bounds,
    certify_supersolution, compact_bumps, frozen_flow_fixed_point, ignition_wave, richardson_limit,
    speed_bound, FixedPointConfig, DEFAULT_SEED, DEFAULT_TRUNCATION,
};
use chemowave::spectral::principal_eigenvalue_only;
use chemowave::{
    greens_psi, run, solve_chemical, BoundaryCase, Grid, GrowthProfile, OutcomeKind, RunConfig,
    RunResult,
};
use chemowave_harness::{load_config, run_experiment, Report, RunSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn(&Ctx) -> Check);

struct Ctx {
    out: tempfile::TempDir,
}

impl Ctx {
    fn config(&self, name: &str, extra: &[(&str, String)]) -> RunSpec {
        let path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../experiments")
            .join(format!("{name}.cfg"));
        let dir: PathBuf = self.out.path().join(name);
        let mut overrides = vec![("out", dir.display().to_string())];
        overrides.extend(extra.iter().cloned());
        load_config(&path, &overrides).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn simulate(&self, name: &str, extra: &[(&str, String)]) -> RunResult {
        let spec = self.config(name, extra);
        match run_experiment(&spec)
            .unwrap_or_else(|e| panic!("{name}: {e}"))
            .report
        {
            Report::Simulate(r) => r,
            _ => panic!("{name}: not a simulation report"),
        }
    }
}

fn require(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac1(ctx: &Ctx) -> Check {
    let start = Instant::now();
    let res = ctx.simulate("case1_exp1", &[]);
    let secs = start.elapsed().as_secs_f64();
    let o = &res.outcome;
    let rel = (o.u_at_right - 10.0).abs() / 10.0;
    require(
        o.kind == OutcomeKind::ForcedWaveCase1
            && o.final_sup_diff < 1e-2
            && rel < 0.02
            && secs < 30.0,
        format!(
            "outcome {}, |u(10)-u(9)| {:.3e}, u(10,L) {:.5}, {secs:.1} s",
            o.kind, o.final_sup_diff, o.u_at_right
        ),
    )
}

fn ac2(ctx: &Ctx) -> Check {
    let res = ctx.simulate("case1_exp3", &[]);
    let target = 10.0 / 0.15;
    let plateau = res.outcome.u_at_right;
    let rel = (plateau - target).abs() / target;
    require(
        rel < 0.02,
        format!("u(60,L) {plateau:.4} vs {target:.4} ({:.2}%)", 100.0 * rel),
    )
}

fn ac3(ctx: &Ctx) -> Check {
    let o = ctx.simulate("case1_exp4", &[]).outcome;
    require(
        o.kind == OutcomeKind::Extinction && o.final_sup_u < 1e-3,
        format!("outcome {}, sup u(140) {:.3e}", o.kind, o.final_sup_u),
    )
}

fn ac4(ctx: &Ctx) -> Check {
    let a = ctx.simulate("case2_exp1", &[]).outcome;
    let b = ctx.simulate("case2_exp3", &[]).outcome;
    require(
        a.kind == OutcomeKind::ForcedWaveCase2
            && a.final_sup_diff < 1e-2
            && a.final_sup_u > 1.0
            && b.kind == OutcomeKind::Extinction,
        format!(
            "c = 1: {}, |u(10)-u(9)| {:.3e}, max u {:.4}; c = 6.5: {}",
            a.kind, a.final_sup_diff, a.final_sup_u, b.kind
        ),
    )
}

fn ac5(ctx: &Ctx) -> Check {
    let dir = |tag: &str| ctx.out.path().join(tag).display().to_string();
    let short = [("out", dir("l20"))];
    let long = [("L", "40".to_string()), ("out", dir("l40"))];
    let gs = *ctx.config("case1_exp1", &short).grid();
    let gl = *ctx.config("case1_exp1", &long).grid();
    let us = ctx.simulate("case1_exp1", &short).trajectory.last.u;
    let ul = ctx.simulate("case1_exp1", &long).trajectory.last.u;
    let mut worst = 0.0f64;
    for (i, x) in gs.nodes().enumerate() {
        if x.abs() <= 15.0 + 1e-9 {
            let j = gl.nearest(x);
            assert!((gl.x(j) - x).abs() < 1e-9);
            worst = worst.max((us[i] - ul[j]).abs());
        }
    }
    require(
        worst < 5e-2,
        format!("sup difference on [-15, 15]: {worst:.3e}"),
    )
}

fn ac6(_: &Ctx) -> Check {
    let exact = 10.0 - 0.25 - std::f64::consts::PI.powi(2) / 196.0;
    let r = GrowthProfile::constant(10.0);
    let err = |h: f64| -> f64 {
        (principal_eigenvalue_only(&r, 1.0, 7.0, h).expect("eigenvalue") - exact).abs()
    };
    let (e1, e2) = (err(0.01), err(0.005));
    let ratio = e1 / e2;
    require(
        e2 < 1e-3 && (3.5..=4.5).contains(&ratio),
        format!("error {e2:.3e} at h = 0.005, halving ratio {ratio:.3}"),
    )
}

fn ac7(_: &Ctx) -> Check {
    let grid = Grid::new(40.0, 0.05).expect("grid");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let u = compact_bumps(&grid, 10.0, 5.0, &mut rng);
        let fd = solve_chemical(&u, &grid, 1.0, 1.0, BoundaryCase::Case2).expect("solve");
        let exact = greens_psi(&u, &grid, 1.0, 1.0);
        for (i, x) in grid.nodes().enumerate() {
            if x.abs() <= 20.0 {
                worst = worst.max((fd.v[i] - exact[i]).abs());
            }
        }
    }
    require(
        worst < 1e-3,
        format!("sup difference {worst:.3e} over 50 densities"),
    )
}

fn ac8(ctx: &Ctx) -> Check {
    let spec = ctx.config("case1_exp1", &[]);
    let rep = certify_greens_bounds(
        spec.params(),
        spec.profile.r_star(),
        spec.grid(),
        200,
        DEFAULT_SEED,
    )
    .map_err(|e| e.to_string())?;
    require(
        rep.psi_slack >= -1e-8 && rep.psi_x_slack >= -1e-8,
        format!(
            "min slack psi {:.3e}, psi_x {:.3e} over {} samples",
            rep.psi_slack, rep.psi_x_slack, rep.samples
        ),
    )
}

fn ac9(ctx: &Ctx) -> Check {
    let mut worst = Vec::new();
    for name in ["case1_exp1", "case2_exp1"] {
        let spec = ctx.config(name, &[]);
        let (p, prof, grid) = (spec.params(), &spec.profile, spec.grid());
        let env = match spec.bc() {
            BoundaryCase::Case1 => build_upper_envelope_case1(p, prof, grid, None),
            BoundaryCase::Case2 => build_upper_envelope_case2(p, prof, grid, None),
        }
        .map_err(|e| format!("{name}: {e}"))?;
        let rep = certify_supersolution(&env, p, prof, 100, DEFAULT_SEED)
            .map_err(|e| format!("{name}: {e}"))?;
        worst.push((name, rep.worst()));
    }
    require(
        worst.iter().all(|(_, w)| *w <= 1e-8),
        worst
            .iter()
            .map(|(n, w)| format!("{n} worst residual {w:.3e}"))
            .collect::<Vec<_>>()
            .join(", "),
    )
}

fn ac10(ctx: &Ctx) -> Check {
    let spec = ctx.config("case1_exp1", &[]);
    let p = spec.params();
    let bound = speed_bound(p, 10.0);
    let mut speeds = [0.0; 3];
    for (s, eps) in speeds.iter_mut().zip([0.1, 0.05, 0.025]) {
        *s = ignition_wave(p, 10.0, eps, DEFAULT_TRUNCATION)
            .map_err(|e| format!("eps = {eps}: {e}"))?
            .speed;
    }
    let inside = speeds.iter().all(|&s| s > 0.0 && s < bound);
    let est = richardson_limit(speeds);
    let rel = (est.limit - bound).abs() / bound;
    require(
        inside && rel < 0.01,
        format!(
            "speeds {:.6} {:.6} {:.6}, extrapolated {:.4} vs {bound:.4} ({:.2}%)",
            speeds[0],
            speeds[1],
            speeds[2],
            est.limit,
            100.0 * rel
        ),
    )
}

fn ac11(ctx: &Ctx) -> Check {
    let spec = ctx.config("case1_exp1", &[]);
    let (p, prof, grid) = (spec.params(), &spec.profile, spec.grid());
    let fp = FixedPointConfig::default();
    let rep = frozen_flow_fixed_point(p, prof, grid, BoundaryCase::Case1, &fp)
        .map_err(|e| e.to_string())?;
    let cfg = RunConfig::new(*p, prof, *grid, BoundaryCase::Case1, fp.tau, 5.0)
        .map_err(|e| e.to_string())?;
    let res = run(&cfg, &rep.u_star).map_err(|e| e.to_string())?;
    let drift = res
        .trajectory
        .last
        .u
        .iter()
        .zip(&rep.u_star)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let last = rep.outer_diffs.last().copied().unwrap_or(f64::NAN);
    require(
        rep.converged
            && last < 1e-4
            && rep.outer_iterations <= 30
            && rep.inner_monotone(1e-10)
            && drift < 1e-3,
        format!(
            "{} outer iterations, last diff {last:.3e}, max inner increase {:.3e}, drift {drift:.3e}",
            rep.outer_iterations, rep.max_inner_increase
        ),
    )
}

fn ac12(ctx: &Ctx) -> Check {
    let spec = ctx.config("sweep_case1_c", &[("mode", "sweep".into())]);
    let report = match run_experiment(&spec).map_err(|e| e.to_string())?.report {
        Report::Sweep(s) => s,
        _ => return Err("not a sweep report".into()),
    };
    let target = -2.0 * 10f64.sqrt();
    match report.transition {
        Some(t) => require(
            (t - target).abs() <= 0.2,
            format!("transition at c = {t:.3} vs {target:.3}"),
        ),
        None => Err("no extinction/forced-wave switch found".into()),
    }
}

fn main() {
    let ctx = Ctx {
        out: tempfile::tempdir().expect("temp dir"),
    };
    let checks: [Criterion; 12] = [
        ("AC1 forced wave, separated habitat", ac1),
        ("AC2 weak damping plateau", ac2),
        ("AC3 fast shift extinction", ac3),
        ("AC4 patch habitat wave and extinction", ac4),
        ("AC5 robustness in L", ac5),
        ("AC6 eigenvalue closed form", ac6),
        ("AC7 kernel oracle equivalence", ac7),
        ("AC8 kernel bounds", ac8),
        ("AC9 super-solution certification", ac9),
        ("AC10 ignition speed limit", ac10),
        ("AC11 frozen-flow fixed point", ac11),
        ("AC12 regime transition sweep", ac12),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| check(&ctx)))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("PASS {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{secs:.1} s]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
