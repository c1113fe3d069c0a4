//! Benchmark fixtures. Everything is seeded so runs compare like with like.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochpath_core::bnc::FlowGraph;
use stochpath_core::{generate_instance, parse_tsplib, GenerationConfig, Instance, Pose};

const BAYS29: &str = include_str!("../../../data/bays29.tsp");

pub fn random_poses(count: usize, seed: u64) -> Vec<Pose> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Pose::new(
                rng.random_range(0.0..2000.0),
                rng.random_range(0.0..2000.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

/// Dense random digraph with fractional capacities, like a support graph.
pub fn random_flow_graph(n: usize, density: f64, seed: u64) -> FlowGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = FlowGraph::new(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(density) {
                g.add_arc(u, v, rng.random_range(0.0..1.0));
            }
        }
    }
    g
}

/// A bays29 instance with the first `targets` coordinates.
pub fn bays29_instance(targets: usize, vehicles: usize, required: usize, scenarios: usize) -> Instance {
    let coords = parse_tsplib(BAYS29).expect("bundled TSPLIB file parses").coordinates();
    generate_instance("bays29", &coords[..targets], vehicles, required, scenarios, 42, GenerationConfig::default())
        .expect("fixture parameters are feasible")
}
