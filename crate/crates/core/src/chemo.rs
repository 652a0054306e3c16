//! The chemical concentration `v` slaved to the species density `u`.

use crate::error::{Error, Result};
use crate::model::{BoundaryCase, Grid};
use crate::tridiag::Factored;

/// Closure of the zero-flux condition at `x = L` in the separated-habitat case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeumannClosure {
    /// `v_M = v_{M-1}`.
    #[default]
    FirstOrder,
    /// Reflected ghost node `v_{M+1} = v_{M-1}`; second order.
    GhostNode,
}

impl std::str::FromStr for NeumannClosure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first_order" | "first-order" => Ok(NeumannClosure::FirstOrder),
            "ghost" | "ghost_node" | "ghost-node" => Ok(NeumannClosure::GhostNode),
            other => Err(Error::param(
                "neumann",
                format!("expected first_order or ghost_node, got `{other}`"),
            )),
        }
    }
}

impl std::fmt::Display for NeumannClosure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NeumannClosure::FirstOrder => "first_order",
            NeumannClosure::GhostNode => "ghost_node",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChemicalField {
    pub v: Vec<f64>,
    pub vx: Vec<f64>,
}

impl ChemicalField {
    pub fn zeros(n: usize) -> Self {
        ChemicalField {
            v: vec![0.0; n],
            vx: vec![0.0; n],
        }
    }
}

/// Discrete elliptic operator `v_xx - nu v + mu u = 0` on a fixed grid,
/// factored once.
#[derive(Debug, Clone)]
pub struct ChemicalSolver {
    grid: Grid,
    mu: f64,
    bc: BoundaryCase,
    closure: NeumannClosure,
    factored: Factored,
}

impl ChemicalSolver {
    pub fn new(grid: &Grid, nu: f64, mu: f64, bc: BoundaryCase) -> Result<Self> {
        Self::with_closure(grid, nu, mu, bc, NeumannClosure::FirstOrder)
    }

    pub fn with_closure(
        grid: &Grid,
        nu: f64,
        mu: f64,
        bc: BoundaryCase,
        closure: NeumannClosure,
    ) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::param("nu", "must be > 0"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::param("mu", "must be > 0"));
        }
        let m = grid.cells();
        let inv_h2 = 1.0 / (grid.h() * grid.h());
        let ghost = bc == BoundaryCase::Case1 && closure == NeumannClosure::GhostNode;
        // unknowns are nodes 1..=m-1, plus node m for the ghost closure
        let n = if ghost { m } else { m - 1 };
        let mut sub = vec![inv_h2; n];
        let mut diag = vec![-2.0 * inv_h2 - nu; n];
        let sup = vec![inv_h2; n];
        sub[0] = 0.0;
        if bc == BoundaryCase::Case1 {
            if ghost {
                sub[n - 1] = 2.0 * inv_h2;
            } else {
                diag[n - 1] += inv_h2;
            }
        }
        let factored = Factored::new(&sub, &diag, &sup)?;
        Ok(ChemicalSolver {
            grid: *grid,
            mu,
            bc,
            closure,
            factored,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn solve(&self, u: &[f64]) -> ChemicalField {
        let mut out = ChemicalField::zeros(self.grid.len());
        self.solve_into(u, &mut out);
        out
    }

    /// Writes `v` and `v_x` for density `u` into `out`.
    pub fn solve_into(&self, u: &[f64], out: &mut ChemicalField) {
        let m = self.grid.cells();
        assert_eq!(u.len(), m + 1);
        out.v.resize(m + 1, 0.0);
        out.vx.resize(m + 1, 0.0);
        let n = self.factored.len();
        let v = &mut out.v;
        v[0] = 0.0;
        for k in 0..n {
            v[k + 1] = -self.mu * u[k + 1];
        }
        self.factored.solve_in_place(&mut v[1..=n]);
        match (self.bc, self.closure) {
            (BoundaryCase::Case2, _) => v[m] = 0.0,
            (BoundaryCase::Case1, NeumannClosure::FirstOrder) => v[m] = v[m - 1],
            (BoundaryCase::Case1, NeumannClosure::GhostNode) => {}
        }
        derivative_into(v, self.grid.h(), self.bc, self.closure, &mut out.vx);
    }
}

fn derivative_into(v: &[f64], h: f64, bc: BoundaryCase, closure: NeumannClosure, vx: &mut [f64]) {
    let m = v.len() - 1;
    let inv_2h = 0.5 / h;
    for i in 1..m {
        vx[i] = (v[i + 1] - v[i - 1]) * inv_2h;
    }
    vx[0] = if m >= 2 {
        (-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv_2h
    } else {
        (v[1] - v[0]) / h
    };
    vx[m] = match (bc, closure) {
        (BoundaryCase::Case2, _) if m >= 2 => (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) * inv_2h,
        (BoundaryCase::Case2, _) => (v[m] - v[m - 1]) / h,
        (BoundaryCase::Case1, NeumannClosure::FirstOrder) => (v[m] - v[m - 1]) / h,
        (BoundaryCase::Case1, NeumannClosure::GhostNode) => 0.0,
    };
}

/// One-shot solve of the discrete chemical equation.
pub fn solve_chemical(
    u: &[f64],
    grid: &Grid,
    nu: f64,
    mu: f64,
    bc: BoundaryCase,
) -> Result<ChemicalField> {
    if u.len() != grid.len() {
        return Err(Error::InvalidGrid(format!(
            "density has {} entries, grid has {} nodes",
            u.len(),
            grid.len()
        )));
    }
    if let Some(i) = u.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidProfile(format!(
            "density not finite at node {i}"
        )));
    }
    Ok(ChemicalSolver::new(grid, nu, mu, bc)?.solve(u))
}

/// Whole-line kernel representation `Psi` and its derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensField {
    pub psi: Vec<f64>,
    pub psi_x: Vec<f64>,
}

// weights of the exact integral of e^{-k s} against the linear interpolant on one cell:
// contribution = near * u(at s=0) + far * u(at s=h)
fn cell_weights(k: f64, h: f64) -> (f64, f64) {
    let a = k * h;
    let e = (-a).exp();
    let i0 = -(-a).exp_m1() / k;
    // 1 - e^{-a}(1 + a), cancellation-free for small a
    let g = if a < 1e-2 {
        // sum_{n>=2} (n-1) (-a)^n / n!
        let mut term = a * a / 2.0;
        let mut sum = 0.0;
        for n in 2..12 {
            sum += (n - 1) as f64 * term;
            term *= -a / (n + 1) as f64;
        }
        sum
    } else {
        -(-a).exp_m1() - a * e
    };
    let i1 = g / (k * k * h);
    (i0 - i1, i1)
}

/// `Psi(x_i) = mu/(2 sqrt nu) int e^{-sqrt(nu)|x_i - y|} u(y) dy` and its
/// derivative, with `u` interpolated linearly between nodes and zero outside
/// the grid.
pub fn greens_field(u: &[f64], grid: &Grid, nu: f64, mu: f64) -> GreensField {
    let n = grid.len();
    assert_eq!(u.len(), n);
    let k = nu.sqrt();
    let h = grid.h();
    let e = (-k * h).exp();
    let (near, far) = cell_weights(k, h);
    let mut left = vec![0.0; n];
    let mut right = vec![0.0; n];
    for i in 1..n {
        left[i] = e * left[i - 1] + near * u[i] + far * u[i - 1];
    }
    for i in (0..n - 1).rev() {
        right[i] = e * right[i + 1] + near * u[i] + far * u[i + 1];
    }
    let scale = mu / (2.0 * k);
    GreensField {
        psi: (0..n).map(|i| scale * (left[i] + right[i])).collect(),
        psi_x: (0..n).map(|i| 0.5 * mu * (right[i] - left[i])).collect(),
    }
}

pub fn greens_psi(u: &[f64], grid: &Grid, nu: f64, mu: f64) -> Vec<f64> {
    greens_field(u, grid, nu, mu).psi
}

pub fn greens_psi_x(u: &[f64], grid: &Grid, nu: f64, mu: f64) -> Vec<f64> {
    greens_field(u, grid, nu, mu).psi_x
}
