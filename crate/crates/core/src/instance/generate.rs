use std::f64::consts::TAU;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Instance, InstanceError, ScenarioSet, Vehicle};
use crate::dubins::Pose;

/// Knobs of the random instance protocol. Recorded in the instance file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// Support `[lo, hi]` of the uniform service-time draws.
    pub service_range: (f64, f64),
    /// Support of the uniform offset added to the mean service time to get the allowance.
    pub tau_bar_offset: (f64, f64),
    /// Penalty rate applied to every vehicle.
    pub gamma: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self { service_range: (5.0, 15.0), tau_bar_offset: (-3.0, 3.0), gamma: 1000.0 }
    }
}

/// How a generated instance was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub seed: u64,
    pub vehicles: usize,
    pub required_per_vehicle: usize,
    pub scenarios: usize,
    pub config: GenerationConfig,
}

// Independent ChaCha8 streams, one per random ingredient.
const STREAM_DEPOTS: u64 = 1;
const STREAM_HEADINGS: u64 = 2;
const STREAM_REQUIRED: u64 = 3;
const STREAM_SERVICE: u64 = 4;
const STREAM_OFFSET: u64 = 5;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Build an instance from planar coordinates following the randomized
/// protocol: every coordinate becomes a target, depots are drawn in the
/// bounding box, vehicle `k` (1-based) gets turn radius `3·k·g/100` with
/// `g` the largest coordinate component.
pub fn generate_instance(
    base_name: &str,
    coords: &[(f64, f64)],
    num_vehicles: usize,
    required_per_vehicle: usize,
    num_scenarios: usize,
    seed: u64,
    config: GenerationConfig,
) -> Result<Instance, InstanceError> {
    if coords.is_empty() {
        return Err(InstanceError::Generation("no coordinates".into()));
    }
    if num_vehicles == 0 {
        return Err(InstanceError::Generation("at least one vehicle is required".into()));
    }
    if num_scenarios == 0 {
        return Err(InstanceError::Generation("scenario count must be positive".into()));
    }
    let num_required = num_vehicles * required_per_vehicle;
    if num_required > coords.len() {
        return Err(InstanceError::Generation(format!(
            "{num_vehicles} vehicles x {required_per_vehicle} required targets exceeds the {} available targets",
            coords.len()
        )));
    }
    let (slo, shi) = config.service_range;
    if !(slo.is_finite() && shi.is_finite() && 0.0 <= slo && slo <= shi) {
        return Err(InstanceError::Generation(format!("invalid service range [{slo}, {shi}]")));
    }
    let (olo, ohi) = config.tau_bar_offset;
    if !(olo.is_finite() && ohi.is_finite() && olo <= ohi) {
        return Err(InstanceError::Generation(format!("invalid allowance offset range [{olo}, {ohi}]")));
    }
    if !(config.gamma.is_finite() && config.gamma >= 0.0) {
        return Err(InstanceError::Generation("penalty rate must be non-negative".into()));
    }

    let grid = coords.iter().flat_map(|&(x, y)| [x, y]).fold(f64::NEG_INFINITY, f64::max);
    if !(grid > 0.0) {
        return Err(InstanceError::Generation("largest coordinate must be positive".into()));
    }
    let (min_x, max_x, min_y, max_y) = coords.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );

    let mut heading_rng = stream(seed, STREAM_HEADINGS);
    let targets: Vec<Pose> = coords
        .iter()
        .map(|&(x, y)| Pose::new(x, y, heading_rng.random_range(0.0..TAU)))
        .collect();

    let mut depot_rng = stream(seed, STREAM_DEPOTS);
    let depots: Vec<Pose> = (0..num_vehicles)
        .map(|_| {
            let x = uniform(&mut depot_rng, (min_x, max_x));
            let y = uniform(&mut depot_rng, (min_y, max_y));
            Pose::new(x, y, heading_rng.random_range(0.0..TAU))
        })
        .collect();

    let vehicles = (0..num_vehicles)
        .map(|k| Vehicle {
            id: k,
            depot: k,
            turn_radius: 3.0 * (k + 1) as f64 * grid / 100.0,
            gamma: config.gamma,
        })
        .collect();

    let mut required_rng = stream(seed, STREAM_REQUIRED);
    let picked = index::sample(&mut required_rng, coords.len(), num_required).into_vec();
    let required = picked
        .chunks(required_per_vehicle.max(1))
        .map(|c| {
            let mut c = c.to_vec();
            c.sort_unstable();
            c
        })
        .chain(std::iter::repeat(Vec::new()))
        .take(num_vehicles)
        .collect();

    let mut service_rng = stream(seed, STREAM_SERVICE);
    let tau: Vec<Vec<Vec<f64>>> = (0..coords.len())
        .map(|_| {
            (0..num_vehicles)
                .map(|_| (0..num_scenarios).map(|_| uniform(&mut service_rng, config.service_range)).collect())
                .collect()
        })
        .collect();
    let prob = vec![1.0 / num_scenarios as f64; num_scenarios];
    let scenarios = ScenarioSet::new(tau, prob);

    let mut offset_rng = stream(seed, STREAM_OFFSET);
    let tau_bar = (0..coords.len())
        .map(|i| {
            (0..num_vehicles)
                .map(|k| {
                    let mean = scenarios.tau[i][k].iter().sum::<f64>() / num_scenarios as f64;
                    mean + uniform(&mut offset_rng, config.tau_bar_offset)
                })
                .collect()
        })
        .collect();

    let instance = Instance {
        name: format!("{base_name}-{num_vehicles}-{required_per_vehicle}"),
        targets,
        depots,
        vehicles,
        required,
        scenarios,
        tau_bar,
        provenance: Some(Provenance {
            source: base_name.to_string(),
            seed,
            vehicles: num_vehicles,
            required_per_vehicle,
            scenarios: num_scenarios,
            config,
        }),
    };
    instance.validate()?;
    Ok(instance)
}
