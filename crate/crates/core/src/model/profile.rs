use std::fmt;

use crate::error::{Error, Result};

/// Continuous piecewise-linear function with constant extension beyond its
/// first and last breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidProfile(
                "at least two breakpoints required".into(),
            ));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidProfile(format!(
                    "breakpoint {i} is not finite"
                )));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidProfile(format!(
                    "breakpoints must be strictly increasing in x (at index {})",
                    i + 1
                )));
            }
        }
        Ok(PiecewiseLinear {
            xs: points.iter().map(|p| p.0).collect(),
            ys: points.iter().map(|p| p.1).collect(),
        })
    }

    pub fn breakpoints(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        // first index with xs[k] > x; k in 1..n
        let k = self.xs.partition_point(|&xk| xk <= x);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[k]);
        if x == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn left_value(&self) -> f64 {
        self.ys[0]
    }

    pub fn right_value(&self) -> f64 {
        *self.ys.last().unwrap()
    }

    pub fn max_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `inf { x : f(x) > level }`, or `None` when `f <= level` everywhere.
    /// Requires `f(-inf) <= level`.
    pub fn first_rise_above(&self, level: f64) -> Option<f64> {
        if self.ys[0] > level {
            return None;
        }
        for k in 1..self.xs.len() {
            if self.ys[k] > level {
                return Some(self.crossing(k - 1, level));
            }
        }
        None
    }

    /// `sup { x : f(x) > level }`, or `None` when `f <= level` everywhere.
    /// Requires `f(+inf) <= level`.
    pub fn last_fall_below_or_at(&self, level: f64) -> Option<f64> {
        let n = self.xs.len();
        if self.ys[n - 1] > level {
            return None;
        }
        for k in (0..n - 1).rev() {
            if self.ys[k] > level {
                return Some(self.crossing(k, level));
            }
        }
        None
    }

    /// `sup { x : f(x) < level }`, or `None` when `f >= level` everywhere.
    /// Requires `f(+inf) >= level`.
    pub fn last_below(&self, level: f64) -> Option<f64> {
        let n = self.xs.len();
        if self.ys[n - 1] < level {
            return None;
        }
        for k in (0..n - 1).rev() {
            if self.ys[k] < level {
                return Some(self.crossing(k, level));
            }
        }
        None
    }

    // level crossing on segment [k, k+1]; the level lies between the endpoint values
    fn crossing(&self, k: usize, level: f64) -> f64 {
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let (y0, y1) = (self.ys[k], self.ys[k + 1]);
        if y1 == y0 {
            return x0;
        }
        x0 + (level - y0) / (y1 - y0) * (x1 - x0)
    }
}

/// Which of the two habitat geometries a growth profile realises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HabitatCase {
    /// `r(-inf) < 0 < r(+inf)`: favourable and unfavourable habitats separated.
    Case1,
    /// `r(+-inf) < 0 < sup r`: favourable patch surrounded by unfavourable habitat.
    Case2,
    Unclassified,
}

impl fmt::Display for HabitatCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HabitatCase::Case1 => "case1",
            HabitatCase::Case2 => "case2",
            HabitatCase::Unclassified => "unclassified",
        })
    }
}

/// Growth rate `r(x)` in the moving frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProfile {
    curve: PiecewiseLinear,
}

impl GrowthProfile {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        let profile = GrowthProfile {
            curve: PiecewiseLinear::new(points)?,
        };
        if profile.classify() == HabitatCase::Case1 && !profile.is_monotone_between_limits() {
            log::warn!(
                "case-1 profile leaves [r(-inf), r(+inf)] = [{}, {}]",
                profile.left_limit(),
                profile.right_limit()
            );
        }
        Ok(profile)
    }

    /// The separated habitat used for the case-1 experiments:
    /// `-1` for `x <= -8`, `11x + 87` on `(-8, -7)`, `10` for `x >= -7`.
    pub fn separated() -> Self {
        GrowthProfile::new(&[(-8.0, -1.0), (-7.0, 10.0)]).unwrap()
    }

    /// The surrounded plateau used for the case-2 experiments:
    /// `-1` for `|x| >= 8`, `10` on `[-7, 7]`, linear ramps in between.
    pub fn patch() -> Self {
        GrowthProfile::new(&[(-8.0, -1.0), (-7.0, 10.0), (7.0, 10.0), (8.0, -1.0)]).unwrap()
    }

    pub fn constant(value: f64) -> Self {
        GrowthProfile::new(&[(-1.0, value), (1.0, value)]).unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.curve.eval(x)
    }

    pub fn curve(&self) -> &PiecewiseLinear {
        &self.curve
    }

    pub fn breakpoints(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        self.curve.breakpoints()
    }

    pub fn left_limit(&self) -> f64 {
        self.curve.left_value()
    }

    pub fn right_limit(&self) -> f64 {
        self.curve.right_value()
    }

    /// `sup r`.
    pub fn r_star(&self) -> f64 {
        self.curve.max_value()
    }

    /// `inf r`.
    pub fn r_lower(&self) -> f64 {
        self.curve.min_value()
    }

    pub fn classify(&self) -> HabitatCase {
        classify_profile(self)
    }

    fn is_monotone_between_limits(&self) -> bool {
        let (lo, hi) = (self.left_limit(), self.right_limit());
        self.curve.breakpoints().all(|(_, r)| lo <= r && r <= hi)
    }

    /// Half-width of the smallest symmetric interval containing
    /// `{ r > max(r(-inf), r(+inf)) }`; zero when that set is empty.
    pub fn support_radius(&self) -> f64 {
        let floor = self.left_limit().max(self.right_limit());
        let left = self.curve.first_rise_above(floor);
        let right = self.curve.last_fall_below_or_at(floor);
        match (left, right) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            (Some(a), None) => a.abs(),
            (None, Some(b)) => b.abs(),
            (None, None) => 0.0,
        }
    }
}

pub fn classify_profile(profile: &GrowthProfile) -> HabitatCase {
    let (left, right) = (profile.left_limit(), profile.right_limit());
    if left < 0.0 && 0.0 < right {
        HabitatCase::Case1
    } else if left < 0.0 && right < 0.0 && profile.r_star() > 0.0 {
        HabitatCase::Case2
    } else {
        HabitatCase::Unclassified
    }
}

/// Initial species density.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Piecewise(PiecewiseLinear),
    /// `scale (x - left)(right - x)` on `[left, right]`, zero elsewhere.
    Bump {
        left: f64,
        right: f64,
        scale: f64,
    },
}

impl InitialCondition {
    /// Ramp from 0 at `x = -1` to `r*/b` at `x = 1`, flat outside.
    pub fn ramp(r_star: f64, b: f64) -> Self {
        let top = r_star / b;
        InitialCondition::Piecewise(PiecewiseLinear::new(&[(-1.0, 0.0), (1.0, top)]).unwrap())
    }

    /// `(x + 1)(1 - x)` on `[-1, 1]`.
    pub fn unit_bump() -> Self {
        InitialCondition::Bump {
            left: -1.0,
            right: 1.0,
            scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialCondition::Piecewise(p) => {
                if p.min_value() < 0.0 {
                    return Err(Error::InvalidProfile(
                        "initial density must be nonnegative".into(),
                    ));
                }
            }
            InitialCondition::Bump { left, right, scale } => {
                if !(left.is_finite() && right.is_finite() && scale.is_finite()) {
                    return Err(Error::InvalidProfile("bump must be finite".into()));
                }
                if right <= left {
                    return Err(Error::InvalidProfile("bump needs left < right".into()));
                }
                if *scale < 0.0 {
                    return Err(Error::InvalidProfile(
                        "initial density must be nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialCondition::Piecewise(p) => p.eval(x),
            InitialCondition::Bump { left, right, scale } => {
                if x < *left || x > *right {
                    0.0
                } else {
                    scale * (x - left) * (right - x)
                }
            }
        }
    }
}

/// Anything that can be evaluated pointwise and sampled on a grid.
pub trait Sampled {
    fn value_at(&self, x: f64) -> f64;
}

impl Sampled for PiecewiseLinear {
    fn value_at(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

impl Sampled for GrowthProfile {
    fn value_at(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

impl Sampled for InitialCondition {
    fn value_at(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

/// Pointwise evaluation at every grid node.
pub fn sample<S: Sampled + ?Sized>(f: &S, grid: &super::Grid) -> Vec<f64> {
    grid.nodes().map(|x| f.value_at(x)).collect()
}
