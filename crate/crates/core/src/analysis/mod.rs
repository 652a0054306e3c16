mod envelope;
mod fixed_point;
mod ignition;
mod residual;

pub use envelope::{
    build_lower_envelope_case1, build_lower_envelope_case2, build_upper_envelope_case1,
    build_upper_envelope_case2, Branch, Claim, Envelope, EnvelopeKind, Profile,
    LOWER_DAMPING_FACTOR,
};
pub use fixed_point::{
    frozen_flow_fixed_point, stationary_residual, FixedPointConfig, FixedPointReport,
};
pub use ignition::{
    ignition_wave, richardson_limit, speed_bound, IgnitionWave, RichardsonEstimate,
    DEFAULT_EPSILONS, DEFAULT_TRUNCATION,
};
pub use residual::{
    certify_greens_bounds, certify_subsolution_case1, certify_supersolution, compact_bumps,
    residual_a, residual_of_samples, sample_below, CertificationReport, CertificationStatus,
    GreensBoundReport, RegionReport, ResidualField, DEFAULT_SAMPLES, DEFAULT_SEED, RESIDUAL_TOL,
};
