//! Principal eigenvalue of `phi'' + c phi' + r phi = lambda phi` on `(-L, L)`
//! with Dirichlet ends.

use crate::error::{Error, Result};
use crate::model::{Grid, GrowthProfile};
use crate::tridiag::{gershgorin, sturm_count, thomas_solve};

pub const DEFAULT_EIG_H: f64 = 0.01;
pub const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    pub half_length: f64,
    pub h: f64,
    /// Principal eigenfunction on all grid nodes, sup norm 1, zero at the ends.
    pub eigenfunction: Option<Vec<f64>>,
    pub converged: bool,
}

/// Diagonal and off-diagonal of the symmetrised operator
/// `psi'' + (r - c^2/4) psi` on the interior nodes of `grid`.
pub fn symmetrized_matrix(profile: &GrowthProfile, c: f64, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let shift = c * c / 4.0;
    let n = grid.cells() - 1;
    let d = (1..=n)
        .map(|i| -2.0 * inv_h2 + profile.eval(grid.x(i)) - shift)
        .collect();
    let e = vec![inv_h2; n.saturating_sub(1)];
    (d, e)
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
pub fn largest_eigenvalue(d: &[f64], e: &[f64], tol: f64) -> (f64, bool) {
    let n = d.len();
    let (lo0, hi0) = gershgorin(d, e);
    let pad = 1e-12 * (1.0 + lo0.abs().max(hi0.abs()));
    let (mut lo, mut hi) = (lo0 - pad, hi0 + pad);
    for _ in 0..400 {
        if hi - lo <= tol {
            return (0.5 * (lo + hi), true);
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval at round-off resolution
            return (mid, true);
        }
        if sturm_count(d, e, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi), false)
}

fn inverse_iteration(d: &[f64], e: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let n = d.len();
    let delta = 1e-7 * (1.0 + lambda.abs());
    let sigma = lambda + delta;
    let shifted: Vec<f64> = d.iter().map(|x| x - sigma).collect();
    let mut sub = vec![0.0; n];
    let mut sup = vec![0.0; n];
    if n > 1 {
        sup[..n - 1].copy_from_slice(&e[..n - 1]);
        sub[1..].copy_from_slice(&e[..n - 1]);
    }
    let mut x = vec![1.0; n];
    for _ in 0..20 {
        let mut y = x.clone();
        thomas_solve(&sub, &shifted, &sup, &mut y).ok()?;
        let scale = y
            .iter()
            .fold(0.0f64, |a, &b| if b.abs() > a.abs() { b } else { a });
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        y.iter_mut().for_each(|v| *v /= scale);
        let change = x
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        x = y;
        if change < 1e-13 {
            break;
        }
    }
    Some(x)
}

/// `lambda_L(r, c)` on a grid of step `h`, with its eigenfunction.
pub fn principal_eigenvalue(
    profile: &GrowthProfile,
    c: f64,
    half_length: f64,
    h: f64,
) -> Result<EigenResult> {
    eigen(profile, c, half_length, h, true)
}

/// As [`principal_eigenvalue`] without the eigenfunction.
pub fn principal_eigenvalue_only(
    profile: &GrowthProfile,
    c: f64,
    half_length: f64,
    h: f64,
) -> Result<f64> {
    Ok(eigen(profile, c, half_length, h, false)?.lambda)
}

fn eigen(
    profile: &GrowthProfile,
    c: f64,
    half_length: f64,
    h: f64,
    with_vector: bool,
) -> Result<EigenResult> {
    if !c.is_finite() {
        return Err(Error::param("c", "must be finite"));
    }
    let grid = Grid::new(half_length, h)?;
    let (d, e) = symmetrized_matrix(profile, c, &grid);
    let (lambda, converged) = largest_eigenvalue(&d, &e, BISECTION_TOL);
    assert!(
        converged,
        "Sturm bisection cannot stall on a symmetric tridiagonal matrix"
    );
    let eigenfunction = if with_vector {
        inverse_iteration(&d, &e, lambda).and_then(|psi| back_transform(&psi, c, &grid))
    } else {
        None
    };
    if with_vector && eigenfunction.is_none() {
        log::warn!("eigenfunction lost positivity to underflow on L = {half_length}");
    }
    Ok(EigenResult {
        lambda,
        half_length,
        h,
        eigenfunction,
        converged,
    })
}

// phi = e^{-c x / 2} psi, evaluated in log space and scaled to sup 1
fn back_transform(psi: &[f64], c: f64, grid: &Grid) -> Option<Vec<f64>> {
    if psi.iter().any(|&p| !(p > 0.0)) {
        return None;
    }
    let logs: Vec<f64> = psi
        .iter()
        .enumerate()
        .map(|(k, p)| p.ln() - 0.5 * c * grid.x(k + 1))
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut phi = Vec::with_capacity(grid.len());
    phi.push(0.0);
    phi.extend(logs.iter().map(|l| (l - top).exp()));
    phi.push(0.0);
    Some(phi)
}

/// Outcome of the domain-doubling sweep for `lambda_inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaInfinity {
    /// Last computed `lambda_L`; a lower bound for the limit at this resolution.
    pub estimate: f64,
    /// `(L, lambda_L)` in the order computed.
    pub sequence: Vec<(f64, f64)>,
    pub h: f64,
    pub tol: f64,
    pub converged: bool,
    /// `max r_i - c^2/4`, an upper bound for every `lambda_L` on this grid family.
    pub upper_bound: f64,
}

impl LambdaInfinity {
    /// `Some(true)` if the sign is certified positive, `Some(false)` if
    /// certified negative, `None` otherwise.
    pub fn certified_sign(&self) -> Option<bool> {
        if self.estimate > 0.0 {
            Some(true)
        } else if self.upper_bound < 0.0 || (self.converged && self.estimate + self.tol < 0.0) {
            Some(false)
        } else {
            None
        }
    }
}

pub const MAX_DOUBLINGS: usize = 10;

/// Estimates `lim_{L -> inf} lambda_L(r, c)` by doubling `L` at fixed `h`.
pub fn lambda_infinity(
    profile: &GrowthProfile,
    c: f64,
    tol: f64,
    h: f64,
) -> Result<LambdaInfinity> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", "must be > 0"));
    }
    let start = profile.support_radius() + 10.0;
    let mut half_length = (start / h).ceil() * h;
    let mut sequence = Vec::new();
    let mut previous: Option<f64> = None;
    let mut converged = false;
    for _ in 0..=MAX_DOUBLINGS {
        let lambda = principal_eigenvalue_only(profile, c, half_length, h)?;
        sequence.push((half_length, lambda));
        if let Some(prev) = previous {
            if lambda < prev - 1e-9 {
                return Err(Error::NonMonotone {
                    half_length,
                    previous: prev,
                    current: lambda,
                });
            }
            if lambda - prev < tol {
                converged = true;
                break;
            }
        }
        previous = Some(lambda);
        half_length *= 2.0;
    }
    let estimate = sequence.last().unwrap().1;
    let upper = profile.r_star() - c * c / 4.0;
    Ok(LambdaInfinity {
        estimate,
        sequence,
        h,
        tol,
        converged,
        upper_bound: upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_laplacian_on_length_pi() {
        let zero = GrowthProfile::constant(0.0);
        let l = PI / 2.0;
        // h must divide 2L exactly
        let h = PI / 1000.0;
        let res = principal_eigenvalue(&zero, 0.0, l, h).unwrap();
        assert!((res.lambda + 1.0).abs() < 1e-5, "{}", res.lambda);
        let discrete = -4.0 / (h * h) * (h / 2.0).sin().powi(2);
        assert!((res.lambda - discrete).abs() < 1e-9);
    }

    #[test]
    fn constant_plateau_closed_form() {
        let r = GrowthProfile::constant(10.0);
        let exact = 10.0 - 0.25 - PI * PI / 196.0;
        let res = principal_eigenvalue(&r, 1.0, 7.0, 0.01).unwrap();
        assert!((res.lambda - exact).abs() < 1e-4);
        let phi = res.eigenfunction.unwrap();
        assert!(phi[1..phi.len() - 1].iter().all(|&p| p > 0.0));
        let top = phi.iter().copied().fold(0.0, f64::max);
        assert!((top - 1.0).abs() < 1e-15);
        // phi = e^{-x/2} cos(pi x / 14)
        let grid = Grid::new(7.0, 0.01).unwrap();
        let exact_phi: Vec<f64> = grid
            .nodes()
            .map(|x| (-0.5 * x).exp() * (PI * x / 14.0).cos())
            .collect();
        let m = exact_phi.iter().copied().fold(0.0, f64::max);
        let err = phi
            .iter()
            .zip(&exact_phi)
            .map(|(a, b)| (a - b / m).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn shift_and_advection_identities() {
        let p = GrowthProfile::patch();
        let shifted = GrowthProfile::new(
            &p.breakpoints()
                .map(|(x, r)| (x, r + 3.7))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let a = principal_eigenvalue_only(&p, 1.0, 10.0, 0.05).unwrap();
        let b = principal_eigenvalue_only(&shifted, 1.0, 10.0, 0.05).unwrap();
        assert!((b - a - 3.7).abs() < 1e-9);
        let still = principal_eigenvalue_only(&p, 0.0, 10.0, 0.05).unwrap();
        assert!((a - (still - 0.25)).abs() < 1e-9);
    }

    #[test]
    fn monotone_in_half_length() {
        let p = GrowthProfile::patch();
        let mut last = f64::NEG_INFINITY;
        for l in [8.0, 9.0, 12.0, 16.0, 24.0] {
            let lam = principal_eigenvalue_only(&p, 1.0, l, 0.05).unwrap();
            assert!(lam >= last - 1e-9);
            last = lam;
        }
    }

    #[test]
    fn negative_constant_habitat() {
        let r = GrowthProfile::constant(-1.0);
        let res = lambda_infinity(&r, 0.0, 1e-4, 0.05).unwrap();
        assert!(res.converged);
        assert!((res.estimate + 1.0).abs() < 1e-4, "{}", res.estimate);
        assert_eq!(res.certified_sign(), Some(false));
        assert!(res.sequence.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9));
    }

    #[test]
    fn plateau_is_persistent_and_fast_shift_is_not() {
        let p = GrowthProfile::patch();
        let slow = lambda_infinity(&p, 1.0, 1e-4, 0.02).unwrap();
        let l7 = principal_eigenvalue_only(&GrowthProfile::constant(10.0), 1.0, 7.0, 0.02).unwrap();
        assert!(slow.estimate >= l7 - 1e-9);
        assert_eq!(slow.certified_sign(), Some(true));
        let fast = lambda_infinity(&p, 6.5, 1e-4, 0.02).unwrap();
        assert!(fast.estimate <= 10.0 - 6.5 * 6.5 / 4.0);
        assert_eq!(fast.certified_sign(), Some(false));
    }
}
