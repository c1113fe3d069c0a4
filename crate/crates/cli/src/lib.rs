pub mod commands;
pub mod plot;
pub mod record;
pub mod tables;

pub use record::{ModelChoice, SolveRecord, RECORD_VERSION};
