mod common;

use std::time::Duration;

use common::random_instance;
use stochpath_core::bnc::{select_branching, solve, FractionalSeparation, SolveStatus, SolverParams};
use stochpath_core::bnc::AnchorPolicy;
use stochpath_core::model::build_two_stage;
use stochpath_core::oracle::brute_force_solve;
use stochpath_core::recourse::tours_from_arcs;

#[test]
fn branching_prefers_y_then_lowest_index() {
    let inst = random_instance(4, 2, 0, 1, 1);
    let (m, map) = build_two_stage(&inst);
    let mut point = vec![0.0; m.num_columns()];
    assert_eq!(select_branching(&point, &map, 1e-6), None);
    point[map.x(0, 4, 1)] = 0.5;
    point[map.y(3, 1)] = 0.5;
    assert_eq!(select_branching(&point, &map, 1e-6), Some(map.y(3, 1)));
    point[map.y(1, 0)] = 0.5;
    assert_eq!(select_branching(&point, &map, 1e-6), Some(map.y(1, 0)));
    point[map.y(0, 1)] = 0.3;
    assert_eq!(select_branching(&point, &map, 1e-6), Some(map.y(1, 0)));
}

#[test]
fn accepted_tours_are_subtour_free() {
    for seed in 0..10 {
        let inst = random_instance(8, 1 + (seed % 3) as usize, (seed % 2) as usize, 3, 900 + seed);
        let sol = solve(&inst, &SolverParams::default());
        let depot = inst.num_targets();
        let arcs: Vec<_> = (0..inst.num_vehicles()).map(|k| sol.arcs(k, depot)).collect();
        let rebuilt = tours_from_arcs(&inst, &arcs, &sol.assignment).expect("tours reconstruct");
        assert_eq!(rebuilt, sol.tours);
    }
}

#[test]
fn log_is_monotone() {
    for seed in 0..5 {
        let inst = random_instance(8, 2, 0, 5, 950 + seed);
        let params = SolverParams { log_interval: 1, ..SolverParams::default() };
        let sol = solve(&inst, &params);
        let mut bound = f64::NEG_INFINITY;
        let mut inc = f64::INFINITY;
        for rec in &sol.log {
            assert!(rec.bound >= bound - 1e-9);
            bound = rec.bound;
            if let Some(v) = rec.incumbent {
                assert!(v <= inc + 1e-9);
                inc = v;
            }
        }
        assert!(sol.bound <= sol.objective + 1e-6 * sol.objective);
    }
}

#[test]
fn policy_switches_keep_the_optimum() {
    for seed in 0..6 {
        let inst = random_instance(7, 2, 1, 4, 980 + seed);
        let best = brute_force_solve(&inst).unwrap().objective;
        for (anchors, fractional) in [
            (AnchorPolicy::All, FractionalSeparation::Always),
            (AnchorPolicy::Strongest, FractionalSeparation::Off),
        ] {
            let params = SolverParams { anchors, fractional, heuristic: seed % 2 == 0, ..SolverParams::default() };
            let sol = solve(&inst, &params);
            assert!(sol.is_certified());
            assert!((sol.objective - best).abs() <= 1e-6 * best, "seed {seed}: {} vs {best}", sol.objective);
        }
    }
}

#[test]
fn zero_time_limit_returns_an_incumbent() {
    let inst = random_instance(8, 2, 1, 5, 4);
    let params = SolverParams { time_limit: Duration::ZERO, ..SolverParams::default() };
    let sol = solve(&inst, &params);
    assert_eq!(sol.status, SolveStatus::TimeLimit);
    assert_eq!(sol.tours.iter().map(Vec::len).sum::<usize>(), inst.num_targets());
    assert!(sol.bound <= sol.objective);
}
