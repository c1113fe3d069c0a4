//! Problem data: oriented targets and depots, the heterogeneous fleet,
//! vehicle-specific required targets and the scenario set of service times.

mod generate;
mod io;
mod tsplib;

pub use generate::{generate_instance, GenerationConfig, Provenance};
pub use io::{load_instance, save_instance, FORMAT_VERSION};
pub use tsplib::{parse_tsplib, TsplibData, TsplibError, TsplibNode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dubins::Pose;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Tsplib(#[from] TsplibError),
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("cannot generate instance: {0}")]
    Generation(String),
}

impl InstanceError {
    fn invalid(path: impl Into<String>, message: impl std::fmt::Display) -> Self {
        InstanceError::Invalid(format!("{}: {message}", path.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: usize,
    /// Index into [`Instance::depots`].
    pub depot: usize,
    pub turn_radius: f64,
    /// Penalty per unit of excess service time.
    pub gamma: f64,
}

/// Finite set of equally or unequally weighted service-time realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    /// `tau[target][vehicle][scenario]`.
    tau: Vec<Vec<Vec<f64>>>,
    prob: Vec<f64>,
}

impl ScenarioSet {
    pub fn new(tau: Vec<Vec<Vec<f64>>>, prob: Vec<f64>) -> Self {
        Self { tau, prob }
    }

    pub fn num_scenarios(&self) -> usize {
        self.prob.len()
    }

    pub fn tau(&self, target: usize, vehicle: usize, scenario: usize) -> f64 {
        self.tau[target][vehicle][scenario]
    }

    pub fn tau_tensor(&self) -> &[Vec<Vec<f64>>] {
        &self.tau
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    /// Probability-weighted mean service time of one vehicle at one target.
    pub fn expected_tau(&self, target: usize, vehicle: usize) -> f64 {
        self.tau[target][vehicle]
            .iter()
            .zip(&self.prob)
            .map(|(t, p)| t * p)
            .sum()
    }

    fn validate(&self, num_targets: usize, num_vehicles: usize) -> Result<(), InstanceError> {
        let omega = self.prob.len();
        if omega == 0 {
            return Err(InstanceError::invalid("scenarios.probabilities", "at least one scenario is required"));
        }
        for (w, &p) in self.prob.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(InstanceError::invalid(format!("scenarios.probabilities[{w}]"), "must be a non-negative number"));
            }
        }
        let total: f64 = self.prob.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(InstanceError::invalid(
                "scenarios.probabilities",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        if self.tau.len() != num_targets {
            return Err(InstanceError::invalid(
                "scenarios.service_times",
                format!("expected {num_targets} target rows, found {}", self.tau.len()),
            ));
        }
        for (i, per_vehicle) in self.tau.iter().enumerate() {
            if per_vehicle.len() != num_vehicles {
                return Err(InstanceError::invalid(
                    format!("scenarios.service_times[{i}]"),
                    format!("expected {num_vehicles} vehicle rows, found {}", per_vehicle.len()),
                ));
            }
            for (k, samples) in per_vehicle.iter().enumerate() {
                if samples.len() != omega {
                    return Err(InstanceError::invalid(
                        format!("scenarios.service_times[{i}][{k}]"),
                        format!("expected {omega} scenarios, found {}", samples.len()),
                    ));
                }
                if let Some(w) = samples.iter().position(|t| !t.is_finite() || *t < 0.0) {
                    return Err(InstanceError::invalid(
                        format!("scenarios.service_times[{i}][{k}][{w}]"),
                        "service times must be finite and non-negative",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A complete problem instance. Targets are numbered `0..targets.len()`,
/// depots `0..depots.len()`; vehicle `k` starts and ends at `depots[vehicles[k].depot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub targets: Vec<Pose>,
    pub depots: Vec<Pose>,
    pub vehicles: Vec<Vehicle>,
    /// Targets that only vehicle `k` may (and must) visit, sorted ascending.
    pub required: Vec<Vec<usize>>,
    pub scenarios: ScenarioSet,
    /// `tau_bar[target][vehicle]`: service-time allowance.
    pub tau_bar: Vec<Vec<f64>>,
    pub provenance: Option<Provenance>,
}

impl Instance {
    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn num_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.num_scenarios()
    }

    pub fn depot_pose(&self, vehicle: usize) -> Pose {
        self.depots[self.vehicles[vehicle].depot]
    }

    /// Vehicle that must visit `target`, if the target is not a common one.
    pub fn required_owner(&self, target: usize) -> Option<usize> {
        self.required.iter().position(|r| r.binary_search(&target).is_ok())
    }

    /// Poses seen by vehicle `k`: all targets in order, then its depot.
    pub fn vehicle_poses(&self, vehicle: usize) -> Vec<Pose> {
        let mut poses = self.targets.clone();
        poses.push(self.depot_pose(vehicle));
        poses
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let nt = self.targets.len();
        let nv = self.vehicles.len();
        if nt == 0 {
            return Err(InstanceError::invalid("targets", "at least one target is required"));
        }
        if nv == 0 {
            return Err(InstanceError::invalid("vehicles", "at least one vehicle is required"));
        }
        for (label, poses) in [("targets", &self.targets), ("depots", &self.depots)] {
            if let Some(i) = poses
                .iter()
                .position(|p| !(p.x.is_finite() && p.y.is_finite() && (0.0..std::f64::consts::TAU).contains(&p.theta)))
            {
                return Err(InstanceError::invalid(format!("{label}[{i}]"), "pose must be finite with heading in [0, 2π)"));
            }
        }
        if self.depots.len() != nv {
            return Err(InstanceError::invalid(
                "depots",
                format!("{} depots for {nv} vehicles", self.depots.len()),
            ));
        }
        let mut depot_used = vec![false; self.depots.len()];
        for (k, v) in self.vehicles.iter().enumerate() {
            let path = format!("vehicles[{k}]");
            if v.id != k {
                return Err(InstanceError::invalid(path, format!("id {} does not match position", v.id)));
            }
            if v.depot >= self.depots.len() {
                return Err(InstanceError::invalid(path, format!("depot {} does not exist", v.depot)));
            }
            if std::mem::replace(&mut depot_used[v.depot], true) {
                return Err(InstanceError::invalid(path, format!("depot {} is shared", v.depot)));
            }
            if !(v.turn_radius.is_finite() && v.turn_radius > 0.0) {
                return Err(InstanceError::invalid(path, "turn radius must be positive"));
            }
            if !(v.gamma.is_finite() && v.gamma >= 0.0) {
                return Err(InstanceError::invalid(path, "penalty rate must be non-negative"));
            }
        }
        if self.required.len() != nv {
            return Err(InstanceError::invalid(
                "required",
                format!("{} sets for {nv} vehicles", self.required.len()),
            ));
        }
        let mut owner = vec![None; nt];
        for (k, set) in self.required.iter().enumerate() {
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return Err(InstanceError::invalid(format!("required[{k}]"), "must be strictly increasing"));
            }
            for &i in set {
                if i >= nt {
                    return Err(InstanceError::invalid(format!("required[{k}]"), format!("target {i} does not exist")));
                }
                if let Some(other) = owner[i].replace(k) {
                    return Err(InstanceError::invalid(
                        format!("required[{k}]"),
                        format!("target {i} is also required by vehicle {other}"),
                    ));
                }
            }
        }
        self.scenarios.validate(nt, nv)?;
        if self.tau_bar.len() != nt {
            return Err(InstanceError::invalid("tau_bar", format!("expected {nt} rows, found {}", self.tau_bar.len())));
        }
        for (i, row) in self.tau_bar.iter().enumerate() {
            if row.len() != nv {
                return Err(InstanceError::invalid(format!("tau_bar[{i}]"), format!("expected {nv} entries, found {}", row.len())));
            }
            if row.iter().any(|t| !t.is_finite()) {
                return Err(InstanceError::invalid(format!("tau_bar[{i}]"), "entries must be finite"));
            }
        }
        Ok(())
    }
}
