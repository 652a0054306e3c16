use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("CFL condition violated: tau/h^2 = {ratio} > 1/2")]
    CflViolated { ratio: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("zero pivot at row {row} in tridiagonal elimination")]
    SingularPivot { row: usize },

    #[error("solution blew up at t = {t}: sup|u| = {sup}")]
    BlowUp { t: f64, sup: f64 },

    #[error("speed bracket ({lo}, {hi}) does not enclose a sign change")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("principal eigenvalue decreased from {previous} to {current} when L grew to {half_length}; h too coarse")]
    NonMonotone {
        half_length: f64,
        previous: f64,
        current: f64,
    },

    #[error("{lemma} [{region}] violated: residual {residual:e} at x = {x} (sample {sample})")]
    CertificationFailed {
        lemma: &'static str,
        region: &'static str,
        sample: usize,
        x: f64,
        residual: f64,
    },

    #[error("envelope sandwich violated at x = {x}: {detail}")]
    SandwichViolation { x: f64, detail: String },
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularPivot { .. }
                | Error::BlowUp { .. }
                | Error::BracketFailure { .. }
                | Error::NonMonotone { .. }
                | Error::CertificationFailed { .. }
                | Error::SandwichViolation { .. }
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
