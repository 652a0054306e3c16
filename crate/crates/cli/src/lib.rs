//! Configuration parsing, experiment orchestration, sweeps and file outputs
//! for the `chemowave` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod experiment;
mod output;
mod sweep;

pub use config::{
    keys_help, parse_config, parse_config_with, render, Axis, AxisName, EigOptions, Mode, RunSpec,
    SweepOptions, VerifyOptions, KEYS,
};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, Artifacts, EigReport, IgnitionRow, Report, VerifyReport};
pub use output::num;
pub use sweep::{estimate_transition, run_point, PointResult, SweepReport, SweepRow, SweepSpec};

/// Reads and parses a config file, applying `overrides` on top.
pub fn load_config(path: &std::path::Path, overrides: &[(&str, String)]) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_with(&text, overrides)
}
