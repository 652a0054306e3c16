//! Tridiagonal elimination and Sturm counts.

use crate::error::{Error, Result};

/// Solves `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are ignored. Overwrites `rhs` with the solution.
pub fn thomas_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::SingularPivot { row: 0 });
    }
    c[0] = sup[0] / beta;
    rhs[0] /= beta;
    for i in 1..n {
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::SingularPivot { row: i });
        }
        c[i] = sup[i] / beta;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Precomputed forward sweep of a tridiagonal matrix that is solved many
/// times with different right-hand sides.
#[derive(Debug, Clone)]
pub struct Factored {
    sub: Vec<f64>,
    inv_beta: Vec<f64>,
    c: Vec<f64>,
}

impl Factored {
    pub fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        assert!(sub.len() == n && sup.len() == n);
        let mut inv_beta = vec![0.0; n];
        let mut c = vec![0.0; n];
        for i in 0..n {
            let beta = if i == 0 {
                diag[0]
            } else {
                diag[i] - sub[i] * c[i - 1]
            };
            if beta == 0.0 || !beta.is_finite() {
                return Err(Error::SingularPivot { row: i });
            }
            inv_beta[i] = 1.0 / beta;
            c[i] = sup[i] * inv_beta[i];
        }
        Ok(Factored {
            sub: sub.to_vec(),
            inv_beta,
            c,
        })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        rhs[0] *= self.inv_beta[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub[i] * rhs[i - 1]) * self.inv_beta[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c[i] * rhs[i + 1];
        }
    }
}

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal
/// matrix with diagonal `d` and off-diagonal `e` (`e[i]` couples `i`, `i+1`).
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    debug_assert_eq!(e.len() + 1, n.max(1));
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        if q.abs() < tiny {
            q = -tiny;
        }
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matvec(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += sub[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn one_by_one() {
        let mut rhs = [-1.0];
        thomas_solve(&[0.0], &[-3.0], &[0.0], &mut rhs).unwrap();
        assert!((rhs[0] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut rhs = [1.0, 1.0];
        let err = thomas_solve(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &mut rhs).unwrap_err();
        assert_eq!(err, Error::SingularPivot { row: 0 });
        let err = Factored::new(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::SingularPivot { row: 1 });
    }

    #[test]
    fn sturm_count_on_laplacian() {
        // eigenvalues of tridiag(1, -2, 1), n = 5: -2 + 2 cos(k pi / 6)
        let d = [-2.0; 5];
        let e = [1.0; 4];
        let eig: Vec<f64> = (1..=5)
            .map(|k| -2.0 + 2.0 * (k as f64 * std::f64::consts::PI / 6.0).cos())
            .collect();
        for (k, &l) in eig.iter().enumerate() {
            assert_eq!(sturm_count(&d, &e, l + 1e-9), 5 - k);
            assert_eq!(sturm_count(&d, &e, l - 1e-9), 5 - k - 1);
        }
        let (lo, hi) = gershgorin(&d, &e);
        assert!(lo <= eig[4] && eig[0] <= hi);
    }

    proptest! {
        #[test]
        fn solves_diagonally_dominant_systems(
            rows in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..40)
        ) {
            let n = rows.len();
            let sub: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let sup: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + sub[i].abs() + sup[i].abs()).collect();
            let rhs: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let mut x = rhs.clone();
            thomas_solve(&sub, &diag, &sup, &mut x).unwrap();
            let back = matvec(&sub, &diag, &sup, &x);
            for i in 0..n {
                prop_assert!((back[i] - rhs[i]).abs() < 1e-12);
            }
            let f = Factored::new(&sub, &diag, &sup).unwrap();
            let mut y = rhs.clone();
            f.solve_in_place(&mut y);
            for i in 0..n {
                prop_assert!((x[i] - y[i]).abs() < 1e-13);
            }
        }
    }
}
