use std::collections::BTreeMap;
use std::fmt;

use super::ignition::IgnitionWave;
use crate::error::{Error, Result};
use crate::model::{
    theta_root, BoundaryCase, Grid, GrowthProfile, HabitatCase, RootOrientation, SimParams,
};

/// Smooth closed-form building block of an envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    Constant {
        level: f64,
    },
    /// `level * exp(rate * (x - anchor))`.
    Exp {
        level: f64,
        rate: f64,
        anchor: f64,
    },
}

impl Branch {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Branch::Constant { level } => level,
            Branch::Exp {
                level,
                rate,
                anchor,
            } => level * (rate * (x - anchor)).exp(),
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match *self {
            Branch::Constant { .. } => 0.0,
            Branch::Exp { rate, .. } => rate * self.value(x),
        }
    }

    pub fn curvature(&self, x: f64) -> f64 {
        match *self {
            Branch::Constant { .. } => 0.0,
            Branch::Exp { rate, .. } => rate * rate * self.value(x),
        }
    }
}

/// Value, slope and curvature at a point.
pub trait Profile {
    fn jet(&self, x: f64) -> (f64, f64, f64);
}

impl Profile for Branch {
    fn jet(&self, x: f64) -> (f64, f64, f64) {
        (self.value(x), self.slope(x), self.curvature(x))
    }
}

/// A branch together with the open interval on which the super-solution
/// inequality is claimed for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Claim {
    pub region: &'static str,
    pub branch: Branch,
    pub lo: f64,
    pub hi: f64,
}

impl Claim {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    UpperCase1,
    UpperCase2,
    LowerCase1,
    LowerCase2Numeric,
}

impl fmt::Display for EnvelopeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvelopeKind::UpperCase1 => "upper_case1",
            EnvelopeKind::UpperCase2 => "upper_case2",
            EnvelopeKind::LowerCase1 => "lower_case1",
            EnvelopeKind::LowerCase2Numeric => "lower_case2_numeric",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub kind: EnvelopeKind,
    pub grid: Grid,
    pub values: Vec<f64>,
    pub constants: BTreeMap<&'static str, f64>,
    /// Active branch on each closed interval, left to right; empty for numeric envelopes.
    pub pieces: Vec<(f64, f64, Branch)>,
    pub claims: Vec<Claim>,
}

impl Envelope {
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    /// Points where adjacent branches meet.
    pub fn kinks(&self) -> Vec<f64> {
        self.pieces
            .windows(2)
            .map(|w| w[0].1)
            .filter(|x| x.is_finite())
            .collect()
    }

    fn piece_at(&self, x: f64) -> Option<&Branch> {
        self.pieces
            .iter()
            .find(|(lo, hi, _)| *lo <= x && x <= *hi)
            .map(|(_, _, b)| b)
    }

    /// Closed-form value, if the envelope is analytic.
    pub fn eval(&self, x: f64) -> Option<f64> {
        self.piece_at(x).map(|b| b.value(x))
    }
}

impl Profile for Envelope {
    fn jet(&self, x: f64) -> (f64, f64, f64) {
        self.piece_at(x)
            .expect("numeric envelope has no closed form")
            .jet(x)
    }
}

fn sample_pieces(grid: &Grid, pieces: &[(f64, f64, Branch)]) -> Vec<f64> {
    grid.nodes()
        .map(|x| {
            pieces
                .iter()
                .find(|(lo, hi, _)| *lo <= x && x <= *hi)
                .map(|(_, _, b)| b.value(x))
                .unwrap()
        })
        .collect()
}

/// `min{B, B e^{theta1 (x - x1)}}` with `B = r*/(b - chi mu)`.
///
/// `r1` defaults to `r(-inf)/2`.
pub fn build_upper_envelope_case1(
    params: &SimParams,
    profile: &GrowthProfile,
    grid: &Grid,
    r1: Option<f64>,
) -> Result<Envelope> {
    if profile.classify() != HabitatCase::Case1 {
        return Err(Error::NotApplicable(format!(
            "upper envelope for separated habitats needs a case-1 profile, got {}",
            profile.classify()
        )));
    }
    params.require_bounded()?;
    let left = profile.left_limit();
    let r1 = r1.unwrap_or(0.5 * left);
    if !(left < r1 && r1 < 0.0) {
        return Err(Error::param(
            "r1",
            format!("needs r(-inf) < r1 < 0, got {r1}"),
        ));
    }
    let x1 = profile
        .curve()
        .first_rise_above(r1)
        .expect("case-1 profile rises above r1 < 0 < r(+inf)");
    let theta1 = theta_root(params.c, r1, RootOrientation::Forward)?;
    let level = params.upper_level(profile.r_star());
    let exp = Branch::Exp {
        level,
        rate: theta1,
        anchor: x1,
    };
    let flat = Branch::Constant { level };
    let pieces = vec![(f64::NEG_INFINITY, x1, exp), (x1, f64::INFINITY, flat)];
    let constants = BTreeMap::from([("level", level), ("r1", r1), ("theta1", theta1), ("x1", x1)]);
    Ok(Envelope {
        kind: EnvelopeKind::UpperCase1,
        grid: *grid,
        values: sample_pieces(grid, &pieces),
        constants,
        pieces,
        claims: vec![
            Claim {
                region: "constant",
                branch: flat,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            },
            Claim {
                region: "left_tail",
                branch: exp,
                lo: f64::NEG_INFINITY,
                hi: x1,
            },
        ],
    })
}

/// Exponential tails on both sides of a flat middle at level `r*/(b - chi mu)`.
///
/// `r_bar` defaults to `max{r(-inf), r(+inf)}/2`.
pub fn build_upper_envelope_case2(
    params: &SimParams,
    profile: &GrowthProfile,
    grid: &Grid,
    r_bar: Option<f64>,
) -> Result<Envelope> {
    if profile.classify() != HabitatCase::Case2 {
        return Err(Error::NotApplicable(format!(
            "upper envelope for a surrounded patch needs a case-2 profile, got {}",
            profile.classify()
        )));
    }
    params.require_bounded()?;
    let floor = profile.left_limit().max(profile.right_limit());
    let r_bar = r_bar.unwrap_or(0.5 * floor);
    if !(floor < r_bar && r_bar < 0.0) {
        return Err(Error::param(
            "r_bar",
            format!("needs max(r(+-inf)) < r_bar < 0, got {r_bar}"),
        ));
    }
    let curve = profile.curve();
    let x_bar = curve
        .first_rise_above(r_bar)
        .expect("case-2 profile exceeds r_bar");
    let x_tilde = curve
        .last_fall_below_or_at(r_bar)
        .expect("case-2 profile exceeds r_bar");
    let theta_bar = theta_root(params.c, r_bar, RootOrientation::Forward)?;
    let theta_tilde = theta_root(params.c, r_bar, RootOrientation::Backward)?;
    let level = params.upper_level(profile.r_star());
    let left = Branch::Exp {
        level,
        rate: theta_bar,
        anchor: x_bar,
    };
    let flat = Branch::Constant { level };
    let right = Branch::Exp {
        level,
        rate: -theta_tilde,
        anchor: x_tilde,
    };
    let pieces = vec![
        (f64::NEG_INFINITY, x_bar, left),
        (x_bar, x_tilde, flat),
        (x_tilde, f64::INFINITY, right),
    ];
    let constants = BTreeMap::from([
        ("level", level),
        ("r_bar", r_bar),
        ("theta_bar", theta_bar),
        ("theta_tilde", theta_tilde),
        ("x_bar", x_bar),
        ("x_tilde", x_tilde),
    ]);
    Ok(Envelope {
        kind: EnvelopeKind::UpperCase2,
        grid: *grid,
        values: sample_pieces(grid, &pieces),
        constants,
        pieces,
        claims: vec![
            Claim {
                region: "left_tail",
                branch: left,
                lo: f64::NEG_INFINITY,
                hi: x_bar,
            },
            Claim {
                region: "constant",
                branch: flat,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            },
            Claim {
                region: "right_tail",
                branch: right,
                lo: x_tilde,
                hi: f64::INFINITY,
            },
        ],
    })
}

/// `max{psi(x - x0), 0}` with the wave's zero moved to the smallest
/// admissible `x0`.
pub fn build_lower_envelope_case1(
    params: &SimParams,
    profile: &GrowthProfile,
    grid: &Grid,
    wave: &IgnitionWave,
    upper: &Envelope,
) -> Result<Envelope> {
    if profile.classify() != HabitatCase::Case1 {
        return Err(Error::NotApplicable(
            "lower envelope for separated habitats needs a case-1 profile".into(),
        ));
    }
    params.require_bounded()?;
    let x1 = upper
        .constant("x1")
        .ok_or_else(|| Error::NotApplicable("upper envelope lacks x1".into()))?;
    let level = profile.r_star() - wave.epsilon;
    if profile.right_limit() < level {
        return Err(Error::NotApplicable(format!(
            "r never stays above r* - eps = {level} to the right"
        )));
    }
    let x0 = match profile.curve().last_below(level) {
        Some(x) if x > x1 => x,
        Some(x) => {
            log::info!("sup{{r < r* - eps}} = {x} <= x1 = {x1}; placing x0 one step right of x1");
            x1 + grid.h()
        }
        None => x1 + grid.h(),
    };
    let values: Vec<f64> = grid.nodes().map(|x| wave.eval(x - x0).max(0.0)).collect();
    for (i, (&lo, &hi)) in values.iter().zip(&upper.values).enumerate() {
        if !(lo < hi) {
            return Err(Error::SandwichViolation {
                x: grid.x(i),
                detail: format!("lower envelope {lo} is not below upper envelope {hi}"),
            });
        }
    }
    let constants = BTreeMap::from([
        ("epsilon", wave.epsilon),
        ("shift", x0),
        ("speed", wave.speed),
        ("x0", x0),
        ("right_level", wave.right_level),
    ]);
    Ok(Envelope {
        kind: EnvelopeKind::LowerCase1,
        grid: *grid,
        values,
        constants,
        pieces: Vec::new(),
        claims: Vec::new(),
    })
}

/// Default enlargement of the damping for the numeric lower envelope.
pub const LOWER_DAMPING_FACTOR: f64 = 4.0;

/// Terminal profile of a Dirichlet-Dirichlet run with damping `factor * b`,
/// zeroed wherever `r <= 0`, used in place of the
/// non-constructive lower envelope.
pub fn build_lower_envelope_case2(
    params: &SimParams,
    profile: &GrowthProfile,
    grid: &Grid,
    upper: &Envelope,
    tau: f64,
    t_end: f64,
    factor: f64,
) -> Result<Envelope> {
    if profile.classify() != HabitatCase::Case2 {
        return Err(Error::NotApplicable(
            "numeric lower envelope needs a case-2 profile".into(),
        ));
    }
    let mut enlarged = *params;
    enlarged.b = factor * params.b;
    enlarged.validate()?;
    let cfg =
        crate::stepper::RunConfig::new(enlarged, profile, *grid, BoundaryCase::Case2, tau, t_end)?;
    let u0 = crate::model::sample(&crate::model::InitialCondition::unit_bump(), grid);
    let res = crate::stepper::run(&cfg, &u0).map_err(|f| f.error)?;
    let mut values = res.trajectory.last.u;
    let m = grid.cells();
    let favourable: Vec<bool> = (0..=m)
        .map(|i| i > 0 && i < m && profile.eval(grid.x(i)) > 0.0)
        .collect();
    for (v, &keep) in values.iter_mut().zip(&favourable) {
        if !keep {
            *v = 0.0;
        }
    }
    for (i, (&lo, &hi)) in values.iter().zip(&upper.values).enumerate() {
        if lo > hi {
            return Err(Error::SandwichViolation {
                x: grid.x(i),
                detail: format!("numeric lower envelope {lo} exceeds upper envelope {hi}"),
            });
        }
    }
    let interior_min = (1..m)
        .filter(|&i| favourable[i])
        .map(|i| values[i])
        .fold(f64::INFINITY, f64::min);
    if !(interior_min > 0.0) {
        return Err(Error::NotApplicable(
            "enlarged-damping run went extinct; no positive lower envelope".into(),
        ));
    }
    let constants = BTreeMap::from([
        ("b_enlarged", enlarged.b),
        ("interior_min", interior_min),
        ("t_end", t_end),
    ]);
    Ok(Envelope {
        kind: EnvelopeKind::LowerCase2Numeric,
        grid: *grid,
        values,
        constants,
        pieces: Vec::new(),
        claims: Vec::new(),
    })
}
