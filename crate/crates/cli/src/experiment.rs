//! One experiment per mode, with its files.

use std::path::PathBuf;

use chemowave::analysis::{
    build_lower_envelope_case1, build_upper_envelope_case1, build_upper_envelope_case2,
    certify_greens_bounds, certify_subsolution_case1, certify_supersolution,
    frozen_flow_fixed_point, ignition_wave, richardson_limit, speed_bound, CertificationReport,
    FixedPointConfig, FixedPointReport, GreensBoundReport, RichardsonEstimate,
};
use chemowave::{
    check_regime, lambda_infinity, principal_eigenvalue, run, BoundaryCase, EigenResult,
    LambdaInfinity, RegimeReport, RunResult, Trajectory,
};
use rayon::prelude::*;

use crate::config::{Mode, RunSpec};
use crate::error::{HarnessError, Result};
use crate::output::{ensure_dir, num, opt, write_kv, write_manifest, Csv};
use crate::sweep::{sweep, SweepReport};

#[derive(Debug, Clone)]
pub struct EigReport {
    /// `lambda_L` on the configured half-length.
    pub at_length: EigenResult,
    pub lambda_inf: LambdaInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgnitionRow {
    pub epsilon: f64,
    pub speed: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub kernel_bounds: GreensBoundReport,
    pub certifications: Vec<CertificationReport>,
    pub ignition: Vec<IgnitionRow>,
    /// Present when the cut-offs halve twice.
    pub extrapolation: Option<RichardsonEstimate>,
    pub fixed_point: Option<FixedPointReport>,
}

#[derive(Debug, Clone)]
pub enum Report {
    Simulate(RunResult),
    Eig(EigReport),
    Regime(RegimeReport),
    Verify(Box<VerifyReport>),
    Sweep(SweepReport),
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

/// Runs the spec's mode and writes its files under `spec.out_dir`.
pub fn run_experiment(spec: &RunSpec) -> Result<Artifacts> {
    ensure_dir(&spec.out_dir)?;
    let mut files = write_manifest(&spec.out_dir, spec)?;
    let report = match spec.mode {
        Mode::Simulate => Report::Simulate(simulate(spec, &mut files)?),
        Mode::Eig => Report::Eig(eig(spec, &mut files)?),
        Mode::Regime => Report::Regime(regime(spec, &mut files)?),
        Mode::Verify => Report::Verify(Box::new(verify(spec, &mut files)?)),
        Mode::Sweep => Report::Sweep(sweep(spec, &mut files)?),
    };
    Ok(Artifacts { report, files })
}

fn write_trajectory(spec: &RunSpec, tr: &Trajectory, files: &mut Vec<PathBuf>) -> Result<()> {
    let grid = spec.grid();
    let mut snaps = Csv::create(&spec.out_dir.join("snapshots.csv"), &["t", "x", "u", "v"])?;
    for s in &tr.snapshots {
        for (i, x) in grid.nodes().enumerate() {
            snaps.row(&[num(s.t), num(x), num(s.u[i]), num(s.v[i])])?;
        }
    }
    files.push(snaps.finish()?);
    let mut conv = Csv::create(
        &spec.out_dir.join("convergence.csv"),
        &["t", "sup_diff", "sup_u", "u_at_L"],
    )?;
    for r in &tr.series {
        conv.row(&[num(r.t), num(r.sup_diff), num(r.sup_u), num(r.u_at_right)])?;
    }
    files.push(conv.finish()?);
    Ok(())
}

fn simulate(spec: &RunSpec, files: &mut Vec<PathBuf>) -> Result<RunResult> {
    let mut cfg = spec.run.clone();
    if cfg.snapshot_times.is_empty() {
        cfg.snapshot_times = vec![cfg.t_end];
    }
    let outcome_path = spec.out_dir.join("outcome.txt");
    match run(&cfg, &spec.initial_density()) {
        Ok(res) => {
            write_trajectory(spec, &res.trajectory, files)?;
            let o = &res.outcome;
            let tr = &res.trajectory;
            files.push(write_kv(
                &outcome_path,
                &[
                    ("status", "ok".into()),
                    ("outcome", o.kind.to_string()),
                    ("plateau", opt(o.plateau)),
                    ("peak", opt(o.peak.map(|p| p.0))),
                    ("peak_x", opt(o.peak.map(|p| p.1))),
                    ("final_sup_diff", num(o.final_sup_diff)),
                    ("final_sup_u", num(o.final_sup_u)),
                    ("u_at_L", num(o.u_at_right)),
                    ("max_sup", num(tr.max_sup)),
                    ("lowest_value", num(tr.lowest_value)),
                ],
            )?);
            Ok(res)
        }
        Err(failure) => {
            if let Some(tr) = &failure.partial {
                write_trajectory(spec, tr, files)?;
            }
            files.push(write_kv(
                &outcome_path,
                &[("status", "failed".into()), ("error", failure.to_string())],
            )?);
            Err(failure.into())
        }
    }
}

fn eig(spec: &RunSpec, files: &mut Vec<PathBuf>) -> Result<EigReport> {
    let c = spec.params().c;
    let at_length = principal_eigenvalue(&spec.profile, c, spec.grid().half_length(), spec.eig.h)
        .map_err(|e| HarnessError::keyed("eig_h", e))?;
    let lambda_inf = lambda_infinity(&spec.profile, c, spec.eig.tol, spec.eig.h)?;

    let mut csv = Csv::create(&spec.out_dir.join("eig.csv"), &["L", "h", "lambda"])?;
    csv.row(&[
        num(at_length.half_length),
        num(at_length.h),
        num(at_length.lambda),
    ])?;
    for &(l, lam) in &lambda_inf.sequence {
        csv.row(&[num(l), num(lambda_inf.h), num(lam)])?;
    }
    files.push(csv.finish()?);
    if let Some(phi) = &at_length.eigenfunction {
        let grid = chemowave::Grid::new(at_length.half_length, at_length.h)?;
        let mut csv = Csv::create(&spec.out_dir.join("eigenfunction.csv"), &["x", "phi"])?;
        for (x, p) in grid.nodes().zip(phi) {
            csv.row(&[num(x), num(*p)])?;
        }
        files.push(csv.finish()?);
    }
    let sign = match lambda_inf.certified_sign() {
        Some(true) => "positive",
        Some(false) => "negative",
        None => "uncertain",
    };
    files.push(write_kv(
        &spec.out_dir.join("eig.txt"),
        &[
            ("lambda_L", num(at_length.lambda)),
            ("L", num(at_length.half_length)),
            ("lambda_inf", num(lambda_inf.estimate)),
            ("lambda_inf_converged", lambda_inf.converged.to_string()),
            ("lambda_inf_upper_bound", num(lambda_inf.upper_bound)),
            ("lambda_inf_sign", sign.into()),
        ],
    )?);
    Ok(EigReport {
        at_length,
        lambda_inf,
    })
}

fn regime(spec: &RunSpec, files: &mut Vec<PathBuf>) -> Result<RegimeReport> {
    let lambda = lambda_infinity(&spec.profile, spec.params().c, spec.eig.tol, spec.eig.h)?;
    let report = check_regime(spec.params(), &spec.profile)
        .map_err(|e| HarnessError::keyed("b", e))?
        .with_lambda_inf(lambda.estimate);
    let path = spec.out_dir.join("regime.txt");
    let text = format!("habitat = {}\n{report}", spec.profile.classify());
    std::fs::write(&path, text).map_err(HarnessError::io(&path))?;
    files.push(path);
    Ok(report)
}

fn halves_twice(eps: &[f64]) -> bool {
    matches!(eps, [a, b, c] if (a / b - 2.0).abs() < 1e-12 && (b / c - 2.0).abs() < 1e-12)
}

fn verify(spec: &RunSpec, files: &mut Vec<PathBuf>) -> Result<VerifyReport> {
    let params = spec.params();
    let profile = &spec.profile;
    let grid = spec.grid();
    let v = &spec.verify;
    let r_star = profile.r_star();
    let cm = params.chi * params.mu;

    let kernel_bounds = certify_greens_bounds(params, r_star, grid, 2 * v.samples, v.seed)
        .map_err(|e| HarnessError::keyed("b", e))?;

    let fp_cfg = FixedPointConfig {
        tau: spec.run.tau,
        max_outer: v.max_outer,
        inner_t: v.inner_t,
        ..FixedPointConfig::default()
    };
    let mut certifications = Vec::new();
    match spec.bc() {
        BoundaryCase::Case1 => {
            let upper = build_upper_envelope_case1(params, profile, grid, None)
                .map_err(|e| HarnessError::keyed("profile", e))?;
            certifications.push(certify_supersolution(
                &upper, params, profile, v.samples, v.seed,
            )?);
            if params.b > 2.0 * cm {
                let wave = ignition_wave(params, r_star, fp_cfg.epsilon, v.truncation)?;
                match build_lower_envelope_case1(params, profile, grid, &wave, &upper) {
                    Ok(lower) => certifications.push(certify_subsolution_case1(
                        &lower, &upper, &wave, params, profile, v.samples, v.seed,
                    )?),
                    Err(e) => log::warn!("sub-solution not certified: {e}"),
                }
            }
        }
        BoundaryCase::Case2 => {
            let upper = build_upper_envelope_case2(params, profile, grid, None)
                .map_err(|e| HarnessError::keyed("profile", e))?;
            certifications.push(certify_supersolution(
                &upper, params, profile, v.samples, v.seed,
            )?);
        }
    }

    let ignition: Vec<IgnitionRow> = if params.b > 2.0 * cm {
        v.epsilons
            .par_iter()
            .map(|&eps| {
                ignition_wave(params, r_star, eps, v.truncation).map(|w| IgnitionRow {
                    epsilon: eps,
                    speed: w.speed,
                    bound: w.bound,
                })
            })
            .collect::<chemowave::Result<_>>()?
    } else {
        log::warn!("b <= 2 chi mu: no ignition wave");
        Vec::new()
    };
    let extrapolation = (halves_twice(&v.epsilons) && ignition.len() == 3)
        .then(|| richardson_limit([ignition[0].speed, ignition[1].speed, ignition[2].speed]));

    let fixed_point = if v.fixed_point && params.b > 2.0 * cm {
        Some(frozen_flow_fixed_point(
            params,
            profile,
            grid,
            spec.bc(),
            &fp_cfg,
        )?)
    } else {
        if v.fixed_point {
            log::warn!("b <= 2 chi mu: fixed point skipped");
        }
        None
    };

    let mut csv = Csv::create(
        &spec.out_dir.join("certification.csv"),
        &[
            "lemma",
            "region",
            "status",
            "worst_residual",
            "worst_sample",
            "worst_x",
            "nodes_checked",
        ],
    )?;
    for c in &certifications {
        for r in &c.regions {
            csv.row(&[
                r.lemma.to_string(),
                r.region.to_string(),
                format!("{:?}", c.status).to_lowercase(),
                num(r.worst_residual),
                r.worst_sample.to_string(),
                num(r.worst_x),
                r.nodes_checked.to_string(),
            ])?;
        }
    }
    files.push(csv.finish()?);

    let mut csv = Csv::create(
        &spec.out_dir.join("kernel_bounds.csv"),
        &["quantity", "bound", "min_slack", "samples"],
    )?;
    let kb = &kernel_bounds;
    csv.row(&[
        "psi".into(),
        num(kb.psi_bound),
        num(kb.psi_slack),
        kb.samples.to_string(),
    ])?;
    csv.row(&[
        "psi_x".into(),
        num(kb.psi_x_bound),
        num(kb.psi_x_slack),
        kb.samples.to_string(),
    ])?;
    files.push(csv.finish()?);

    let mut csv = Csv::create(
        &spec.out_dir.join("ignition.csv"),
        &["epsilon", "speed", "bound"],
    )?;
    for row in &ignition {
        csv.row(&[num(row.epsilon), num(row.speed), num(row.bound)])?;
    }
    files.push(csv.finish()?);

    if let Some(fp) = &fixed_point {
        let mut csv = Csv::create(
            &spec.out_dir.join("fixed_point.csv"),
            &["x", "u_star", "upper", "lower"],
        )?;
        for (i, x) in grid.nodes().enumerate() {
            csv.row(&[
                num(x),
                num(fp.u_star[i]),
                num(fp.upper.values[i]),
                opt(fp.lower.as_ref().map(|l| l.values[i])),
            ])?;
        }
        files.push(csv.finish()?);
    }

    let mut summary = vec![
        ("kernel_psi_slack", num(kernel_bounds.psi_slack)),
        ("kernel_psi_x_slack", num(kernel_bounds.psi_x_slack)),
        ("speed_bound", num(speed_bound(params, r_star))),
    ];
    if let Some(e) = &extrapolation {
        summary.push(("speed_extrapolated", num(e.limit)));
        summary.push(("speed_extrapolation_order", num(e.order)));
    }
    if let Some(fp) = &fixed_point {
        summary.push(("fixed_point_converged", fp.converged.to_string()));
        summary.push(("fixed_point_iterations", fp.outer_iterations.to_string()));
        summary.push(("fixed_point_max_inner_increase", num(fp.max_inner_increase)));
        summary.push(("fixed_point_residual", num(fp.residual_sup)));
    }
    files.push(write_kv(&spec.out_dir.join("verify.txt"), &summary)?);

    Ok(VerifyReport {
        kernel_bounds,
        certifications,
        ignition,
        extrapolation,
        fixed_point,
    })
}
