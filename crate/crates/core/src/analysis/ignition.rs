//! Travelling wave of the cut-off logistic (ignition) nonlinearity.
//!
//! Solves `psi'' - c psi' + f(psi) = 0` with `psi(-inf) = -eps`,
//! `psi(+inf) = P`, `psi' > 0`, where `f(u) = u (a - beta u)` for `u >= 0` and
//! `f = 0` on `[-eps, 0)`.

use crate::error::{Error, Result};
use crate::model::SimParams;

pub const DEFAULT_EPSILONS: [f64; 3] = [0.1, 0.05, 0.025];
pub const DEFAULT_TRUNCATION: f64 = 60.0;
pub const SHOOT_STEP: f64 = 1e-3;
pub const MANIFOLD_OFFSET: f64 = 1e-6;
pub const SPEED_TOL: f64 = 1e-8;

/// `2 sqrt(r* (b - 2 chi mu) / (b - chi mu))`.
pub fn speed_bound(params: &SimParams, r_star: f64) -> f64 {
    let (b, cm) = (params.b, params.chi * params.mu);
    2.0 * (r_star * (b - 2.0 * cm) / (b - cm)).sqrt()
}

#[derive(Debug, Clone, Copy)]
struct Nonlinearity {
    a: f64,
    beta: f64,
}

impl Nonlinearity {
    fn f(&self, u: f64) -> f64 {
        if u >= 0.0 {
            u * (self.a - self.beta * u)
        } else {
            0.0
        }
    }

    fn plateau(&self) -> f64 {
        self.a / self.beta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IgnitionWave {
    pub epsilon: f64,
    pub speed: f64,
    pub bound: f64,
    pub left_level: f64,
    pub right_level: f64,
    /// `psi'(0)` where `psi(0) = 0`.
    pub slope_at_zero: f64,
    pub truncation: f64,
    a: f64,
    beta: f64,
    step: f64,
    /// `(x, psi, psi')` from the zero crossing rightwards; uniform spacing after the first gap.
    nodes: Vec<(f64, f64, f64)>,
    tail_rate: f64,
}

enum Shot {
    /// Reached `psi = 0` with slope `p`; `nodes` are `(x, psi, psi')` from the crossing rightwards.
    Crossing {
        p: f64,
        nodes: Vec<(f64, f64, f64)>,
    },
    Undershoot,
}

fn rhs(nl: &Nonlinearity, c: f64, psi: f64, p: f64) -> (f64, f64) {
    // backward in x: d/ds with s = -x
    (-p, -(c * p - nl.f(psi)))
}

fn rk4(nl: &Nonlinearity, c: f64, y: (f64, f64), ds: f64) -> (f64, f64) {
    let k1 = rhs(nl, c, y.0, y.1);
    let k2 = rhs(nl, c, y.0 + 0.5 * ds * k1.0, y.1 + 0.5 * ds * k1.1);
    let k3 = rhs(nl, c, y.0 + 0.5 * ds * k2.0, y.1 + 0.5 * ds * k2.1);
    let k4 = rhs(nl, c, y.0 + ds * k3.0, y.1 + ds * k3.1);
    (
        y.0 + ds / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + ds / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

fn stable_rate(nl: &Nonlinearity, c: f64) -> f64 {
    // root of m^2 - c m - a = 0 below zero
    let disc = (c * c + 4.0 * nl.a).sqrt();
    -2.0 * nl.a / (c + disc)
}

// integrates from the plateau's stable manifold towards psi = 0, backwards in x
fn shoot(nl: &Nonlinearity, c: f64, step: f64, max_len: f64, keep: bool) -> Shot {
    let m = stable_rate(nl, c);
    let mut y = (nl.plateau() - MANIFOLD_OFFSET, -MANIFOLD_OFFSET * m);
    let mut stored = Vec::new();
    if keep {
        stored.push(y);
    }
    let max_steps = (max_len / step).ceil() as usize;
    for _ in 0..max_steps {
        let next = rk4(nl, c, y, step);
        if next.1 <= 0.0 {
            return Shot::Undershoot;
        }
        if next.0 <= 0.0 {
            // land on psi = 0 with a shortened final step
            let mut ds = step * y.0 / (y.0 - next.0);
            let mut end = rk4(nl, c, y, ds);
            for _ in 0..4 {
                ds += end.0 / end.1;
                end = rk4(nl, c, y, ds);
            }
            let mut nodes = Vec::new();
            if keep {
                nodes.reserve(stored.len() + 1);
                nodes.push((0.0, 0.0, end.1));
                for (j, &(psi, p)) in stored.iter().rev().enumerate() {
                    nodes.push((ds + j as f64 * step, psi, p));
                }
            }
            return Shot::Crossing { p: end.1, nodes };
        }
        y = next;
        if keep {
            stored.push(y);
        }
    }
    Shot::Undershoot
}

fn mismatch(nl: &Nonlinearity, eps: f64, c: f64, step: f64, max_len: f64) -> f64 {
    match shoot(nl, c, step, max_len, false) {
        Shot::Crossing { p, .. } => eps - p / c,
        Shot::Undershoot => eps,
    }
}

/// Computes the ignition wave and its speed by shooting on the speed.
pub fn ignition_wave(
    params: &SimParams,
    r_star: f64,
    epsilon: f64,
    truncation: f64,
) -> Result<IgnitionWave> {
    params.validate()?;
    let (b, cm) = (params.b, params.chi * params.mu);
    if b <= 2.0 * cm {
        return Err(Error::NotApplicable(format!(
            "ignition wave needs b > 2 chi mu (b = {b}, chi mu = {cm})"
        )));
    }
    if !(r_star > 0.0) {
        return Err(Error::param("r_star", "must be > 0"));
    }
    let beta = b - cm;
    let a = r_star - epsilon - cm * r_star / beta;
    if !(epsilon > 0.0 && a > 0.0) {
        return Err(Error::param(
            "epsilon",
            format!("needs 0 < eps < r* (b - 2 chi mu)/(b - chi mu), got {epsilon}"),
        ));
    }
    if !(truncation > 0.0) {
        return Err(Error::param("truncation", "must be > 0"));
    }
    let nl = Nonlinearity { a, beta };
    let bound = speed_bound(params, r_star);
    let max_len = 4.0 * truncation;
    let step = SHOOT_STEP;
    let mut lo = 1e-6 * bound;
    let mut hi = bound;
    let (g_lo, g_hi) = (
        mismatch(&nl, epsilon, lo, step, max_len),
        mismatch(&nl, epsilon, hi, step, max_len),
    );
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::BracketFailure { lo, hi });
    }
    while hi - lo > SPEED_TOL {
        let mid = 0.5 * (lo + hi);
        if mismatch(&nl, epsilon, mid, step, max_len) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let speed = 0.5 * (lo + hi);
    let (slope, nodes) = match shoot(&nl, speed, step, max_len, true) {
        Shot::Crossing { p, nodes } => (p, nodes),
        Shot::Undershoot => return Err(Error::BracketFailure { lo, hi }),
    };
    log::debug!(
        "ignition eps = {epsilon}: speed {speed}, {} profile nodes",
        nodes.len()
    );
    Ok(IgnitionWave {
        epsilon,
        speed,
        bound,
        left_level: -epsilon,
        right_level: nl.plateau(),
        slope_at_zero: slope,
        truncation,
        a,
        beta,
        step,
        nodes,
        tail_rate: stable_rate(&nl, speed),
    })
}

impl IgnitionWave {
    fn nl(&self) -> Nonlinearity {
        Nonlinearity {
            a: self.a,
            beta: self.beta,
        }
    }

    /// `f_eps(u)`.
    pub fn reaction(&self, u: f64) -> f64 {
        self.nl().f(u)
    }

    fn last_node_x(&self) -> f64 {
        self.nodes.last().unwrap().0
    }

    /// `(psi, psi', psi'')` at `x`, with `psi(0) = 0`.
    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        let c = self.speed;
        let (psi, p) = if x <= 0.0 {
            let p0 = self.slope_at_zero;
            let e = (c * x).exp();
            (p0 / c * (e - 1.0), p0 * e)
        } else if x >= self.last_node_x() {
            let (_, psi_end, _) = *self.nodes.last().unwrap();
            let gap = self.right_level - psi_end;
            let e = (self.tail_rate * (x - self.last_node_x())).exp();
            (self.right_level - gap * e, -self.tail_rate * gap * e)
        } else {
            let k = self
                .nodes
                .partition_point(|n| n.0 <= x)
                .clamp(1, self.nodes.len() - 1)
                - 1;
            let nl = self.nl();
            hermite(self.nodes[k], self.nodes[k + 1], x, |psi, p| {
                c * p - nl.f(psi)
            })
        };
        (psi, p, c * p - self.nl().f(psi))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x).0
    }

    /// Sup norm of `psi'' - c psi' + f(psi)` over `[-X, X]`, with `psi''`
    /// from a fourth-order difference of stored slopes.
    pub fn bvp_residual(&self) -> f64 {
        let c = self.speed;
        let h = self.step;
        let nl = self.nl();
        // nodes 1.. are uniformly spaced; stay three steps clear of the kink at 0
        let inside = self.nodes.partition_point(|n| n.0 <= self.truncation);
        let last = inside.min(self.nodes.len().saturating_sub(2));
        let p = |j: usize| self.nodes[j].2;
        let mut worst = 0.0f64;
        for k in 4..last {
            let dp = (-p(k + 2) + 8.0 * p(k + 1) - 8.0 * p(k - 1) + p(k - 2)) / (12.0 * h);
            let res = dp - c * p(k) + nl.f(self.nodes[k].1);
            worst = worst.max(res.abs());
        }
        worst
    }

    pub fn is_increasing(&self) -> bool {
        self.slope_at_zero > 0.0 && self.nodes.iter().all(|&(_, _, p)| p > 0.0)
    }
}

// cubic Hermite for psi (slopes p) and for p (slopes from the equation)
fn hermite(
    a: (f64, f64, f64),
    b: (f64, f64, f64),
    x: f64,
    accel: impl Fn(f64, f64) -> f64,
) -> (f64, f64) {
    let h = b.0 - a.0;
    let t = (x - a.0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let psi = h00 * a.1 + h10 * h * a.2 + h01 * b.1 + h11 * h * b.2;
    let (qa, qb) = (accel(a.1, a.2), accel(b.1, b.2));
    let p = h00 * a.2 + h10 * h * qa + h01 * b.2 + h11 * h * qb;
    (psi, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonEstimate {
    pub limit: f64,
    /// Observed convergence order in the halving parameter.
    pub order: f64,
}

/// Extrapolates `s(eps) -> s(0)` from three values at `eps, eps/2, eps/4`,
/// estimating the order from the data. Falls back to first order when the
/// differences do not shrink geometrically.
pub fn richardson_limit(values: [f64; 3]) -> RichardsonEstimate {
    let [s0, s1, s2] = values;
    let (d1, d2) = (s1 - s0, s2 - s1);
    let ratio = d1 / d2;
    let order = if ratio.is_finite() && ratio > 1.0 {
        ratio.log2()
    } else {
        1.0
    };
    let factor = 2f64.powf(order) - 1.0;
    RichardsonEstimate {
        limit: s2 + d2 / factor,
        order,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> SimParams {
        SimParams::new(0.1, 1.0, 0.05, 1.0, 1.0).unwrap()
    }

    #[test]
    fn bound_and_right_level() {
        let b = speed_bound(&exp1(), 10.0);
        assert!((b - 2.0 * (8.0f64 / 0.9).sqrt()).abs() < 1e-14);
        assert!((b - 5.9628).abs() < 1e-4);
        let w = ignition_wave(&exp1(), 10.0, 0.05, 60.0).unwrap();
        let expect = ((10.0 - 0.05) * 0.9 - 1.0) / 0.81;
        assert!((w.right_level - expect).abs() < 1e-12);
        assert!((w.right_level - 9.8210).abs() < 1e-4);
        assert!(w.speed > 0.0 && w.speed < b);
    }

    #[test]
    fn profile_is_a_monotone_solution() {
        let w = ignition_wave(&exp1(), 10.0, 0.1, 60.0).unwrap();
        assert!(w.is_increasing());
        assert!(w.eval(0.0).abs() < 1e-12);
        assert!((w.eval(-60.0) + 0.1).abs() < 1e-9);
        assert!((w.eval(60.0) - w.right_level).abs() < 1e-6);
        assert!(w.bvp_residual() < 1e-6, "{}", w.bvp_residual());
        // matching at the crossing: left branch reaches -eps
        assert!((w.slope_at_zero / w.speed - 0.1).abs() < 1e-6);
        let mut last = f64::NEG_INFINITY;
        for k in 0..2000 {
            let x = -20.0 + 0.02 * k as f64;
            let v = w.eval(x);
            // the left tail saturates in double precision
            if x > -5.0 {
                assert!(v > last, "x = {x}: {v} <= {last}");
            } else {
                assert!(v >= last);
            }
            last = v;
        }
    }

    #[test]
    fn speed_grows_as_cutoff_shrinks() {
        let speeds: Vec<f64> = DEFAULT_EPSILONS
            .iter()
            .map(|&e| ignition_wave(&exp1(), 10.0, e, 60.0).unwrap().speed)
            .collect();
        assert!(speeds.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn richardson_recovers_a_power_law() {
        let s = |e: f64| 3.0 - 2.0 * e * e;
        let est = richardson_limit([s(0.4), s(0.2), s(0.1)]);
        assert!((est.order - 2.0).abs() < 1e-9);
        assert!((est.limit - 3.0).abs() < 1e-12);
        let flat = richardson_limit([1.0, 1.0, 1.0]);
        assert_eq!(flat.limit, 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let weak = SimParams::new(0.6, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            ignition_wave(&weak, 10.0, 0.05, 60.0),
            Err(Error::NotApplicable(_))
        ));
        assert!(ignition_wave(&exp1(), 10.0, 0.0, 60.0).is_err());
        assert!(ignition_wave(&exp1(), 10.0, 9.0, 60.0).is_err());
    }
}
