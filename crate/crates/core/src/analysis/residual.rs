//! The frozen operator
//! `A_u(U) = U'' + (c - chi Psi_x) U' + (r - chi nu Psi - (b - chi mu) U) U`
//! and randomized certification of the envelope inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::envelope::{Envelope, Profile};
use super::ignition::IgnitionWave;
use crate::chemo::{greens_field, GreensField};
use crate::error::{Error, Result};
use crate::model::{Grid, GrowthProfile, SimParams};

pub const DEFAULT_SAMPLES: usize = 100;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub values: Vec<f64>,
    /// Nodes where a sign is claimed (interior nodes away from kinks).
    pub mask: Vec<bool>,
}

impl ResidualField {
    /// Largest masked value and its node.
    pub fn worst(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .zip(&self.mask)
            .enumerate()
            .filter(|(_, (_, &m))| m)
            .map(|(i, (&v, _))| (i, v))
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
    }
}

fn operator(
    params: &SimParams,
    r: f64,
    psi: f64,
    psi_x: f64,
    (u, ux, uxx): (f64, f64, f64),
) -> f64 {
    uxx + (params.c - params.chi * psi_x) * ux
        + (r - params.chi * params.nu * psi - params.net_damping() * u) * u
}

/// `A_u(U)` at the grid nodes.
///
/// Analytic envelopes are differentiated in closed form and their kink nodes
/// are masked out; numeric ones use central differences, masking the ends and
/// nodes within one step of a kink.
pub fn residual_a(
    u_freeze: &[f64],
    envelope: &Envelope,
    params: &SimParams,
    profile: &GrowthProfile,
) -> ResidualField {
    let grid = &envelope.grid;
    let g = greens_field(u_freeze, grid, params.nu, params.mu);
    let kinks = envelope.kinks();
    let near_kink = |x: f64, width: f64| kinks.iter().any(|&k| (x - k).abs() < width);
    let n = grid.len();
    let mut values = vec![0.0; n];
    let mut mask = vec![false; n];
    if envelope.pieces.is_empty() {
        let h = grid.h();
        let w = &envelope.values;
        for i in 1..n - 1 {
            let x = grid.x(i);
            let jet = (
                w[i],
                (w[i + 1] - w[i - 1]) / (2.0 * h),
                (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h),
            );
            values[i] = operator(params, profile.eval(x), g.psi[i], g.psi_x[i], jet);
            mask[i] = !near_kink(x, h * (1.0 + 1e-9));
        }
    } else {
        let tiny = 1e-9 * grid.h();
        for (i, x) in grid.nodes().enumerate() {
            values[i] = operator(
                params,
                profile.eval(x),
                g.psi[i],
                g.psi_x[i],
                envelope.jet(x),
            );
            mask[i] = !near_kink(x, tiny);
        }
    }
    ResidualField { values, mask }
}

/// `A_u(U)` for sampled `U` with central differences; kinks masked as in [`residual_a`].
pub fn residual_of_samples(
    u_freeze: &[f64],
    target: &[f64],
    kinks: &[f64],
    grid: &Grid,
    params: &SimParams,
    profile: &GrowthProfile,
) -> ResidualField {
    let env = Envelope {
        kind: super::envelope::EnvelopeKind::LowerCase2Numeric,
        grid: *grid,
        values: target.to_vec(),
        constants: Default::default(),
        pieces: Vec::new(),
        claims: Vec::new(),
    };
    let mut field = residual_a(u_freeze, &env, params, profile);
    let h = grid.h();
    for (i, x) in grid.nodes().enumerate() {
        if kinks.iter().any(|&k| (x - k).abs() < h * (1.0 + 1e-9)) {
            field.mask[i] = false;
        }
    }
    field
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificationStatus {
    Certified,
    /// The lemma's hypothesis fails, so a positive residual is not a contradiction.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionReport {
    pub lemma: &'static str,
    pub region: &'static str,
    /// Largest residual in the direction the lemma forbids (positive = violation).
    pub worst_residual: f64,
    pub worst_sample: usize,
    pub worst_x: f64,
    pub nodes_checked: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub status: CertificationStatus,
    pub samples: usize,
    pub seed: u64,
    pub regions: Vec<RegionReport>,
}

impl CertificationReport {
    pub fn worst(&self) -> f64 {
        self.regions
            .iter()
            .map(|r| r.worst_residual)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Deterministic family of densities `0 <= u <= cap` on the grid: zero, the
/// cap itself, scaled caps, random bumps and rough random multiples.
pub fn sample_below(cap: &[f64], grid: &Grid, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match k {
        0 => vec![0.0; cap.len()],
        1 => cap.to_vec(),
        _ => match k % 4 {
            0 => {
                let s: f64 = rng.gen();
                cap.iter().map(|c| s * c).collect()
            }
            1 => {
                let centre = rng.gen_range(-grid.half_length()..grid.half_length());
                let width = rng.gen_range(0.2..grid.half_length());
                let height: f64 = rng.gen_range(0.0..2.0);
                grid.nodes()
                    .zip(cap)
                    .map(|(x, c)| {
                        let z = (x - centre) / width;
                        c * (height * (-z * z).exp()).min(1.0)
                    })
                    .collect()
            }
            2 => cap.iter().map(|c| c * rng.gen::<f64>()).collect(),
            _ => {
                // random step down to zero on one side
                let cut = rng.gen_range(-grid.half_length()..grid.half_length());
                let right: bool = rng.gen();
                grid.nodes()
                    .zip(cap)
                    .map(|(x, c)| if (x > cut) == right { *c } else { 0.0 })
                    .collect()
            }
        },
    }
}

/// Sum of one to three `cos^2` bumps of height at most `height`, supported in
/// `[-radius, radius]`, each at least 4 wide.
///
/// # Panics
/// If `radius < 4`.
pub fn compact_bumps(grid: &Grid, radius: f64, height: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    assert!(radius >= 4.0, "bump radius {radius} below 4");
    let mut u = vec![0.0; grid.len()];
    for _ in 0..rng.gen_range(1..=3) {
        let width = rng.gen_range(2.0..=0.5 * radius);
        let centre = rng.gen_range(-radius + width..=radius - width);
        let amp = rng.gen_range(0.0..=height);
        for (ui, x) in u.iter_mut().zip(grid.nodes()) {
            let z = (x - centre) / width;
            if z.abs() < 1.0 {
                let c = (0.5 * std::f64::consts::PI * z).cos();
                *ui += amp * c * c;
            }
        }
    }
    u
}

fn lemma_name(envelope: &Envelope) -> &'static str {
    match envelope.kind {
        super::envelope::EnvelopeKind::UpperCase1 => "upper_case1",
        super::envelope::EnvelopeKind::UpperCase2 => "upper_case2",
        super::envelope::EnvelopeKind::LowerCase1 => "lower_case1",
        super::envelope::EnvelopeKind::LowerCase2Numeric => "lower_case2",
    }
}

/// Checks `A_u(branch) <= tol` on each claimed region for `n_samples`
/// densities `u` below the envelope.
pub fn certify_supersolution(
    envelope: &Envelope,
    params: &SimParams,
    profile: &GrowthProfile,
    n_samples: usize,
    seed: u64,
) -> Result<CertificationReport> {
    if envelope.claims.is_empty() {
        return Err(Error::NotApplicable(format!(
            "{} envelope makes no super-solution claim",
            envelope.kind
        )));
    }
    params.require_bounded()?;
    let hypothesis = params.b >= 1.5 * params.chi * params.mu;
    let grid = &envelope.grid;
    let lemma = lemma_name(envelope);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut regions: Vec<RegionReport> = envelope
        .claims
        .iter()
        .map(|c| RegionReport {
            lemma,
            region: c.region,
            worst_residual: f64::NEG_INFINITY,
            worst_sample: 0,
            worst_x: f64::NAN,
            nodes_checked: 0,
        })
        .collect();
    let r: Vec<f64> = grid.nodes().map(|x| profile.eval(x)).collect();
    for k in 0..n_samples {
        let u = sample_below(&envelope.values, grid, k, &mut rng);
        let GreensField { psi, psi_x } = greens_field(&u, grid, params.nu, params.mu);
        for (claim, report) in envelope.claims.iter().zip(regions.iter_mut()) {
            for (i, x) in grid.nodes().enumerate() {
                if !claim.contains(x) {
                    continue;
                }
                let res = operator(params, r[i], psi[i], psi_x[i], claim.branch.jet(x));
                report.nodes_checked += 1;
                if res > report.worst_residual {
                    report.worst_residual = res;
                    report.worst_sample = k;
                    report.worst_x = x;
                }
            }
        }
    }
    for rep in &regions {
        if rep.worst_residual > RESIDUAL_TOL && hypothesis {
            return Err(Error::CertificationFailed {
                lemma: rep.lemma,
                region: rep.region,
                sample: rep.worst_sample,
                x: rep.worst_x,
                residual: rep.worst_residual,
            });
        }
    }
    Ok(CertificationReport {
        status: if hypothesis {
            CertificationStatus::Certified
        } else {
            CertificationStatus::Inconclusive
        },
        samples: n_samples,
        seed,
        regions,
    })
}

/// Checks `A_u(max{psi(. - x0), 0}) >= -tol` where `psi > 0`, for densities
/// below the upper envelope.
pub fn certify_subsolution_case1(
    lower: &Envelope,
    upper: &Envelope,
    wave: &IgnitionWave,
    params: &SimParams,
    profile: &GrowthProfile,
    n_samples: usize,
    seed: u64,
) -> Result<CertificationReport> {
    let x0 = lower
        .constant("x0")
        .ok_or_else(|| Error::NotApplicable("lower envelope lacks x0".into()))?;
    let grid = &lower.grid;
    let report_h1 = crate::model::check_regime(params, profile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RegionReport {
        lemma: "lower_case1",
        region: "wave",
        worst_residual: f64::NEG_INFINITY,
        worst_sample: 0,
        worst_x: f64::NAN,
        nodes_checked: 0,
    };
    let tiny = 1e-9 * grid.h();
    for k in 0..n_samples {
        let u = sample_below(&upper.values, grid, k, &mut rng);
        let g = greens_field(&u, grid, params.nu, params.mu);
        for (i, x) in grid.nodes().enumerate() {
            if x <= x0 + tiny {
                continue;
            }
            let jet = wave.jet(x - x0);
            // a sub-solution violation is a negative residual
            let res = -operator(params, profile.eval(x), g.psi[i], g.psi_x[i], jet);
            report.nodes_checked += 1;
            if res > report.worst_residual {
                report.worst_residual = res;
                report.worst_sample = k;
                report.worst_x = x;
            }
        }
    }
    if report.worst_residual > RESIDUAL_TOL && report_h1.h1_holds {
        return Err(Error::CertificationFailed {
            lemma: report.lemma,
            region: report.region,
            sample: report.worst_sample,
            x: report.worst_x,
            residual: report.worst_residual,
        });
    }
    Ok(CertificationReport {
        status: if report_h1.h1_holds {
            CertificationStatus::Certified
        } else {
            CertificationStatus::Inconclusive
        },
        samples: n_samples,
        seed,
        regions: vec![report],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensBoundReport {
    pub samples: usize,
    pub psi_bound: f64,
    pub psi_x_bound: f64,
    /// `min (bound - Psi)` over samples and nodes.
    pub psi_slack: f64,
    /// `min (bound - |Psi_x|)` over samples and nodes.
    pub psi_x_slack: f64,
}

/// Samples `0 <= u <= r*/(b - chi mu)` and measures the slack in
/// `Psi <= mu r* / (nu (b - chi mu))` and `|Psi_x| <= mu r* / (2 sqrt(nu) (b - chi mu))`.
pub fn certify_greens_bounds(
    params: &SimParams,
    r_star: f64,
    grid: &Grid,
    n_samples: usize,
    seed: u64,
) -> Result<GreensBoundReport> {
    params.require_bounded()?;
    let level = params.upper_level(r_star);
    let psi_bound = params.mu * level / params.nu;
    let psi_x_bound = params.mu * level / (2.0 * params.nu.sqrt());
    let cap = vec![level; grid.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi_slack = f64::INFINITY;
    let mut psi_x_slack = f64::INFINITY;
    for k in 0..n_samples {
        let u = sample_below(&cap, grid, k, &mut rng);
        let g = greens_field(&u, grid, params.nu, params.mu);
        for (p, px) in g.psi.iter().zip(&g.psi_x) {
            psi_slack = psi_slack.min(psi_bound - p);
            psi_x_slack = psi_x_slack.min(psi_x_bound - px.abs());
        }
    }
    Ok(GreensBoundReport {
        samples: n_samples,
        psi_bound,
        psi_x_bound,
        psi_slack,
        psi_x_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::envelope::{build_upper_envelope_case1, build_upper_envelope_case2};

    fn exp1() -> SimParams {
        SimParams::new(0.1, 1.0, 0.05, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_target_has_zero_residual() {
        let grid = Grid::new(10.0, 0.1).unwrap();
        let u = vec![1.0; grid.len()];
        let field = residual_of_samples(
            &u,
            &vec![0.0; grid.len()],
            &[],
            &grid,
            &exp1(),
            &GrowthProfile::separated(),
        );
        assert!(field.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flat_level_is_a_supersolution_for_empty_density() {
        let grid = Grid::new(20.0, 0.1).unwrap();
        let profile = GrowthProfile::separated();
        let p = exp1();
        let level = p.upper_level(10.0);
        let field = residual_of_samples(
            &vec![0.0; grid.len()],
            &vec![level; grid.len()],
            &[],
            &grid,
            &p,
            &profile,
        );
        for (i, x) in grid.nodes().enumerate().skip(1).take(grid.len() - 2) {
            let expect = (profile.eval(x) - 10.0) * level;
            assert!((field.values[i] - expect).abs() < 1e-9);
            assert!(field.values[i] <= 0.0);
        }
    }

    #[test]
    fn kink_nodes_are_masked() {
        let grid = Grid::new(20.0, 0.1).unwrap();
        let env =
            build_upper_envelope_case1(&exp1(), &GrowthProfile::separated(), &grid, None).unwrap();
        let field = residual_a(&env.values, &env, &exp1(), &GrowthProfile::separated());
        assert!(field.mask.iter().all(|&m| m), "x1 is not a node at h = 0.1");
        let kinks = [grid.x(100)];
        let f2 = residual_of_samples(
            &env.values,
            &env.values,
            &kinks,
            &grid,
            &exp1(),
            &GrowthProfile::separated(),
        );
        assert!(!f2.mask[100] && !f2.mask[0] && f2.mask[50]);
    }

    #[test]
    fn experiment_one_upper_envelope_certifies() {
        let grid = Grid::new(20.0, 0.1).unwrap();
        let profile = GrowthProfile::separated();
        let env = build_upper_envelope_case1(&exp1(), &profile, &grid, None).unwrap();
        let rep = certify_supersolution(&env, &exp1(), &profile, 20, 7).unwrap();
        assert_eq!(rep.status, CertificationStatus::Certified);
        assert!(rep.worst() <= RESIDUAL_TOL);
        assert_eq!(rep.regions.len(), 2);
    }

    #[test]
    fn weak_damping_is_inconclusive_not_an_error() {
        let grid = Grid::new(20.0, 0.1).unwrap();
        let profile = GrowthProfile::patch();
        let p = SimParams::new(2.5, 1.0, 1.0, 3.0, 1.0).unwrap();
        let env = build_upper_envelope_case2(&p, &profile, &grid, None).unwrap();
        let rep = certify_supersolution(&env, &p, &profile, 10, 1).unwrap();
        assert_eq!(rep.status, CertificationStatus::Inconclusive);
    }

    #[test]
    fn samples_stay_below_the_cap() {
        let grid = Grid::new(5.0, 0.1).unwrap();
        let cap: Vec<f64> = grid.nodes().map(|x| 1.0 + x.abs()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..40 {
            let u = sample_below(&cap, &grid, k, &mut rng);
            assert!(u.iter().zip(&cap).all(|(a, c)| *a >= 0.0 && a <= c));
        }
    }
}
