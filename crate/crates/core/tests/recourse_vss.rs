mod common;

use common::{arc_sets, expected_value_instance, fix_first_stage, random_instance, rel_close};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochpath_core::bnc::{solve, SolverParams};
use stochpath_core::instance::ScenarioSet;
use stochpath_core::lp::solve_lp;
use stochpath_core::model::build_two_stage;
use stochpath_core::oracle::brute_force_solve;
use stochpath_core::recourse::{compute_vss, evaluate_tours, recourse_value};

/// Random assignment respecting required targets, with tours in id order.
fn random_tours(inst: &stochpath_core::instance::Instance, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<Vec<usize>>) {
    let nk = inst.num_vehicles();
    let assignment: Vec<usize> =
        (0..inst.num_targets()).map(|i| inst.required_owner(i).unwrap_or_else(|| rng.random_range(0..nk))).collect();
    let tours = (0..nk).map(|k| (0..inst.num_targets()).filter(|&i| assignment[i] == k).collect()).collect();
    (assignment, tours)
}

#[test]
fn closed_form_matches_fixed_first_stage_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..40u64 {
        let inst = random_instance(5 + (trial % 4) as usize, 1 + (trial % 3) as usize, (trial % 2) as usize, 1 + (trial % 6) as usize, trial);
        let (model, map) = build_two_stage(&inst);
        let (assignment, tours) = random_tours(&inst, &mut rng);
        let lp = solve_lp(&fix_first_stage(&model, &map, &tours), None);
        assert!(lp.is_optimal(), "trial {trial}");
        for w in 0..inst.num_scenarios() {
            let z = recourse_value(&inst, &assignment, w).unwrap();
            for k in 0..inst.num_vehicles() {
                assert!((lp.primal[map.z(k, w)] - z[k]).abs() <= 1e-9, "trial {trial} k {k} w {w}");
            }
        }
        let total = evaluate_tours(&inst, &tours).unwrap().total;
        assert!(rel_close(lp.objective, total, 1e-9));
    }
}

#[test]
fn longer_service_never_lowers_excess() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..30 {
        let inst = random_instance(6, 2, 0, 4, 50 + trial);
        let (assignment, _) = random_tours(&inst, &mut rng);
        let (i, w) = (rng.random_range(0..6), rng.random_range(0..4));
        let k = assignment[i];
        let before = recourse_value(&inst, &assignment, w).unwrap();
        let mut bumped = inst.clone();
        let mut tau = inst.scenarios.tau_tensor().to_vec();
        tau[i][k][w] += rng.random_range(0.0..5.0);
        bumped.scenarios = ScenarioSet::new(tau, inst.scenarios.prob().to_vec());
        let after = recourse_value(&bumped, &assignment, w).unwrap();
        assert!(after[k] >= before[k]);
    }
}

#[test]
fn single_vehicle_has_no_stochastic_value() {
    let params = SolverParams::default();
    for seed in 0..5 {
        let inst = random_instance(7, 1, 0, 10, 70 + seed);
        let r = compute_vss(&inst, &params);
        assert!(r.certified);
        assert!(r.vss.abs() <= 1e-6, "seed {seed}: vss {}", r.vss);
        let mut free = inst.clone();
        free.vehicles[0].gamma = 0.0;
        let tsp = solve(&free, &params);
        let depot = inst.num_targets();
        assert_eq!(arc_sets(&r.stochastic_tours, depot), arc_sets(&tsp.tours, depot), "seed {seed}");
    }
}

#[test]
fn identical_scenarios_have_no_stochastic_value() {
    let base = random_instance(6, 2, 1, 1, 90);
    let mut inst = base.clone();
    let tau = base.scenarios.tau_tensor().iter().map(|t| t.iter().map(|v| vec![v[0]; 4]).collect()).collect();
    inst.scenarios = ScenarioSet::new(tau, vec![0.25; 4]);
    let r = compute_vss(&inst, &SolverParams::default());
    assert!(r.vss.abs() <= 1e-6, "vss {}", r.vss);
}

#[test]
fn vss_matches_enumeration() {
    let params = SolverParams::default();
    for seed in 0..25u64 {
        let inst = random_instance(4 + (seed % 4) as usize, 2 + (seed % 2) as usize, (seed % 2) as usize, 5, 500 + seed);
        let r = compute_vss(&inst, &params);
        assert!(r.certified);
        assert!(r.vss >= -1e-6, "seed {seed}: vss {}", r.vss);
        let s_star = brute_force_solve(&inst).unwrap().objective;
        let evp = brute_force_solve(&expected_value_instance(&inst)).unwrap();
        let d_star = evaluate_tours(&inst, &evp.tours).unwrap().total;
        assert!(rel_close(r.s_star, s_star, 1e-6), "seed {seed}: S* {} vs {s_star}", r.s_star);
        assert!(rel_close(r.evp_objective, evp.objective, 1e-6), "seed {seed}");
        assert!(rel_close(r.d_star, d_star, 1e-6), "seed {seed}: D* {} vs {d_star}", r.d_star);
    }
}
