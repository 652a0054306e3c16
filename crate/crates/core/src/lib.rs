#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod chemo;
pub mod error;
pub mod model;
pub mod spectral;
pub mod stepper;
pub mod tridiag;

pub use chemo::{
    greens_field, greens_psi, greens_psi_x, solve_chemical, ChemicalField, ChemicalSolver,
    GreensField, NeumannClosure,
};
pub use error::{Error, Result};
pub use model::*;
pub use spectral::{lambda_infinity, principal_eigenvalue, EigenResult, LambdaInfinity};
pub use stepper::{
    cfl_check, detect_outcome, run, step, ConvergenceRow, Outcome, OutcomeKind, RunConfig,
    RunFailure, RunResult, Snapshot, State, Stepper, Trajectory,
};
