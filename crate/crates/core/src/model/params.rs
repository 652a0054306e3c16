use crate::error::{Error, Result};

/// Physical parameters of the moving-frame system
///
/// ```text
/// u_t = u_xx + c u_x - chi (u v_x)_x + u (r(x) - b u)
/// 0   = v_xx - nu v + mu u
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    /// Chemotactic sensitivity.
    pub chi: f64,
    /// Production rate of the chemical.
    pub mu: f64,
    /// Degradation rate of the chemical.
    pub nu: f64,
    /// Logistic damping.
    pub b: f64,
    /// Speed of the shifting habitat.
    pub c: f64,
}

impl SimParams {
    pub fn new(chi: f64, mu: f64, nu: f64, b: f64, c: f64) -> Result<Self> {
        let p = SimParams { chi, mu, nu, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("chi", self.chi),
            ("mu", self.mu),
            ("nu", self.nu),
            ("b", self.b),
            ("c", self.c),
        ] {
            if !value.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.chi < 0.0 {
            return Err(Error::param("chi", "must be >= 0"));
        }
        if self.mu <= 0.0 {
            return Err(Error::param("mu", "must be > 0"));
        }
        if self.nu <= 0.0 {
            return Err(Error::param("nu", "must be > 0"));
        }
        if self.b <= 0.0 {
            return Err(Error::param("b", "must be > 0"));
        }
        Ok(())
    }

    /// `b - chi mu`, the damping left after absorbing the chemotactic
    /// self-interaction `chi mu u^2`.
    pub fn net_damping(&self) -> f64 {
        self.b - self.chi * self.mu
    }

    /// Solutions exist globally and stay bounded when `b > chi mu`.
    pub fn is_globally_bounded(&self) -> bool {
        self.net_damping() > 0.0
    }

    pub(crate) fn require_bounded(&self) -> Result<()> {
        if self.is_globally_bounded() {
            Ok(())
        } else {
            Err(Error::param(
                "b",
                format!(
                    "requires b > chi*mu (b = {}, chi*mu = {})",
                    self.b,
                    self.chi * self.mu
                ),
            ))
        }
    }

    /// Upper level `r* / (b - chi mu)` of the a-priori bound and of the super-solutions.
    pub fn upper_level(&self, r_star: f64) -> f64 {
        r_star / self.net_damping()
    }
}
