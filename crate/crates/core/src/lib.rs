//! Exact solver for heterogeneous multi-depot Dubins vehicle path planning
//! with random service times.
pub mod dubins;
pub mod instance;
pub mod lp;
pub mod model;
pub mod bnc;
pub mod recourse;
pub mod oracle;

pub use bnc::{solve, solve_model, Cut, FractionalSeparation, Solution, SolveStats, SolveStatus, SolverParams};
pub use dubins::{cost_matrix, shortest_path, CostMatrix, DubinsPath, PathWord, Pose};
pub use instance::{
    generate_instance, load_instance, parse_tsplib, save_instance, GenerationConfig, Instance, InstanceError, ScenarioSet,
    Vehicle,
};
pub use model::{build_evp, build_two_stage, LinearModel, ModelKind, VariableMap};
pub use recourse::{compute_vss, evaluate_tours, objective_split, VssReport};
