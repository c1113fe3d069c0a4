use serde::{Deserialize, Serialize};
use stochpath_core::bnc::{float_serde, LogRecord};
use stochpath_core::{Cut, Solution, SolveStatus};

pub const RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    /// Two-stage model over all scenarios.
    Stochastic,
    /// Expected-value model.
    Evp,
}

/// Status as it appears in records, e.g. `time_limit`.
pub fn status_label(status: SolveStatus) -> String {
    serde_json::to_value(status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

impl ModelChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stochastic => "stochastic",
            Self::Evp => "evp",
        }
    }
}

/// One solver run, as written to `<instance>.<model>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub record_version: u32,
    pub instance: String,
    pub model: ModelChoice,
    pub status: SolveStatus,
    pub certified: bool,
    pub objective: f64,
    pub first_stage_cost: f64,
    pub expected_penalty: f64,
    #[serde(with = "float_serde")]
    pub bound: f64,
    #[serde(with = "float_serde")]
    pub gap: f64,
    pub nodes: u64,
    pub cuts_added: usize,
    pub separation_calls: usize,
    pub lp_iterations: u64,
    /// Wall-clock fields are the only ones that vary between identical runs.
    pub wall_time_s: f64,
    pub tours: Vec<Vec<usize>>,
    pub assignment: Vec<usize>,
    pub excess: Vec<Vec<f64>>,
    pub cuts: Vec<Cut>,
    pub log: Vec<LogRecord>,
}

impl SolveRecord {
    pub fn new(instance: &str, model: ModelChoice, s: &Solution) -> Self {
        Self {
            record_version: RECORD_VERSION,
            instance: instance.to_string(),
            model,
            status: s.status,
            certified: s.is_certified(),
            objective: s.objective,
            first_stage_cost: s.first_stage_cost,
            expected_penalty: s.expected_penalty,
            bound: s.bound,
            gap: s.gap,
            nodes: s.stats.nodes,
            cuts_added: s.stats.cuts_added,
            separation_calls: s.stats.separation_calls,
            lp_iterations: s.stats.lp_iterations,
            wall_time_s: s.stats.wall_time_s,
            tours: s.tours.clone(),
            assignment: s.assignment.clone(),
            excess: s.excess.clone(),
            cuts: s.cuts.clone(),
            log: s.log.clone(),
        }
    }

    /// Copy with every wall-clock field zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        for l in &mut r.log {
            l.time_s = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}
