//! Two-stage stochastic and expected-value MILP formulations.

mod builder;
pub mod linear;

pub use builder::{build_evp, build_two_stage, to_mps, Var, VariableMap};
pub use linear::*;
