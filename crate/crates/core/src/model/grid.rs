use std::fmt;

use crate::error::{Error, Result};

/// Uniform grid on `[-L, L]` with `M = 2L/h` cells and `M + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_length: f64,
    h: f64,
    cells: usize,
}

impl Grid {
    pub fn new(half_length: f64, h: f64) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "space step must be positive and finite, got {h}"
            )));
        }
        let ratio = 2.0 * half_length / h;
        let cells = ratio.round();
        if cells < 2.0 || (ratio - cells).abs() > 1e-12 * ratio {
            return Err(Error::InvalidGrid(format!(
                "2L/h = {ratio} is not an integer >= 2 (L = {half_length}, h = {h})"
            )));
        }
        Ok(Grid {
            half_length,
            h,
            cells: cells as usize,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of cells `M`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node `i` (zero based), `x_0 = -L`, `x_M = L`.
    pub fn x(&self, i: usize) -> f64 {
        if i == self.cells {
            return self.half_length;
        }
        -self.half_length + 2.0 * self.half_length * (i as f64) / (self.cells as f64)
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.x(i))
    }

    /// Index of the node closest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let s = (x + self.half_length) / self.h;
        (s.round().max(0.0) as usize).min(self.cells)
    }
}

/// Boundary conditions of the truncated problem on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCase {
    /// Dirichlet at `-L`, zero flux at `L`.
    Case1,
    /// Dirichlet at both ends.
    Case2,
}

impl fmt::Display for BoundaryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCase::Case1 => "case1",
            BoundaryCase::Case2 => "case2",
        })
    }
}

impl std::str::FromStr for BoundaryCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "case1" | "1" => Ok(BoundaryCase::Case1),
            "case2" | "2" => Ok(BoundaryCase::Case2),
            other => Err(Error::param(
                "bc",
                format!("expected case1 or case2, got `{other}`"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_layout() {
        let g = Grid::new(20.0, 0.1).unwrap();
        assert_eq!(g.cells(), 400);
        assert_eq!(g.len(), 401);
        assert_eq!(g.x(0), -20.0);
        assert_eq!(g.x(400), 20.0);
        assert!((g.x(200)).abs() < 1e-14);
        assert_eq!(g.nearest(-7.0), 130);
    }

    #[test]
    fn rejects_non_integral_cells() {
        assert!(Grid::new(1.0, 0.3).is_err());
        assert!(Grid::new(1.0, 0.0).is_err());
        assert!(Grid::new(-1.0, 0.1).is_err());
        assert!(Grid::new(1.0, 1.0).is_ok());
        assert!(Grid::new(1.0, 1.5).is_err());
        assert!(Grid::new(7.0, 0.005).is_ok());
    }

    #[test]
    fn boundary_case_parses() {
        assert_eq!(
            "Case1".parse::<BoundaryCase>().unwrap(),
            BoundaryCase::Case1
        );
        assert_eq!(
            "case2".parse::<BoundaryCase>().unwrap(),
            BoundaryCase::Case2
        );
        assert!("case3".parse::<BoundaryCase>().is_err());
    }
}
