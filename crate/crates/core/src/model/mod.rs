mod grid;
mod params;
mod profile;
mod regime;

pub use grid::{BoundaryCase, Grid};
pub use params::SimParams;
pub use profile::{
    classify_profile, sample, GrowthProfile, HabitatCase, InitialCondition, PiecewiseLinear,
    Sampled,
};
pub use regime::{c_star, check_regime, theta_root, RegimeReport, RootOrientation};
