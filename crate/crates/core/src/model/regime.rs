use std::fmt;

use super::{GrowthProfile, SimParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootOrientation {
    /// Root of `theta^2 + c theta + r = 0`.
    Forward,
    /// Root of `theta^2 - c theta + r = 0`.
    Backward,
}

/// Positive root of `theta^2 +- c theta + r = 0` for `r < 0`.
pub fn theta_root(c: f64, r: f64, orientation: RootOrientation) -> Result<f64> {
    if !c.is_finite() || !r.is_finite() {
        return Err(Error::param("theta_root", "arguments must be finite"));
    }
    if r >= 0.0 {
        return Err(Error::param(
            "r",
            format!("theta_root needs r < 0, got {r}"),
        ));
    }
    let k = match orientation {
        RootOrientation::Forward => c,
        RootOrientation::Backward => -c,
    };
    let disc = (k * k - 4.0 * r).sqrt();
    // avoid cancellation in -k + disc when k > 0
    let theta = if k > 0.0 {
        -2.0 * r / (k + disc)
    } else {
        (disc - k) / 2.0
    };
    let residual = theta * theta + k * theta + r;
    let scale = 1f64.max(c.abs()).max(r.abs());
    debug_assert!(theta > 0.0);
    debug_assert!(residual.abs() <= 1e-12 * scale * (1.0 + theta * theta));
    Ok(theta)
}

/// Minimal spreading speed `2 sqrt(r*)` of the unforced logistic equation.
pub fn c_star(r_star: f64) -> f64 {
    2.0 * r_star.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub h1_holds: bool,
    /// `chi mu r* / (2 sqrt(nu) (b - chi mu)) - 2 sqrt(r* (b - 2 chi mu) / (b - chi mu))`,
    /// `None` when `b <= 2 chi mu`.
    pub h1_threshold: Option<f64>,
    pub h2_damping_holds: bool,
    pub c_star: f64,
    pub lambda_inf: Option<f64>,
}

impl RegimeReport {
    pub fn with_lambda_inf(mut self, lambda_inf: f64) -> Self {
        self.lambda_inf = Some(lambda_inf);
        self
    }
}

impl fmt::Display for RegimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.h1_threshold {
            Some(t) => writeln!(f, "h1_threshold = {t:?}")?,
            None => writeln!(f, "h1_threshold = undefined")?,
        }
        writeln!(f, "h1_holds = {}", self.h1_holds)?;
        writeln!(f, "h2_damping_holds = {}", self.h2_damping_holds)?;
        writeln!(f, "c_star = {:?}", self.c_star)?;
        match self.lambda_inf {
            Some(l) => writeln!(f, "lambda_inf = {l:?}"),
            None => writeln!(f, "lambda_inf = none"),
        }
    }
}

/// Evaluates the parameter hypotheses of the existence theory.
pub fn check_regime(params: &SimParams, profile: &GrowthProfile) -> Result<RegimeReport> {
    params.validate()?;
    params.require_bounded()?;
    let r_star = profile.r_star();
    let h1_threshold = h1_threshold(params, r_star);
    if h1_threshold.is_none() {
        log::info!("b <= 2 chi mu: h1 threshold undefined");
    }
    Ok(RegimeReport {
        h1_holds: h1_threshold.is_some_and(|t| params.c > t),
        h1_threshold,
        h2_damping_holds: params.b >= 1.5 * params.chi * params.mu,
        c_star: c_star(r_star),
        lambda_inf: None,
    })
}

fn h1_threshold(params: &SimParams, r_star: f64) -> Option<f64> {
    let (chi, mu, nu, b) = (params.chi, params.mu, params.nu, params.b);
    if b <= 2.0 * chi * mu {
        return None;
    }
    let net = b - chi * mu;
    let drift = chi * mu * r_star / (2.0 * nu.sqrt() * net);
    let speed = 2.0 * (r_star.max(0.0) * (b - 2.0 * chi * mu) / net).sqrt();
    Some(drift - speed)
}
