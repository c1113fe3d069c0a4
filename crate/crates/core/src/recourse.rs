//! Second-stage evaluation and the value of the stochastic solution.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnc::{solve_model, Solution, SolverParams};
use crate::dubins::cost_matrix;
use crate::instance::Instance;
use crate::model::{build_evp, build_two_stage};

#[derive(Debug, Error, PartialEq)]
pub enum RecourseError {
    #[error("assignment: {0}")]
    Assignment(String),
    #[error("required targets: {0}")]
    Required(String),
    #[error("target degree: {0}")]
    Degree(String),
    #[error("depot degree: {0}")]
    DepotDegree(String),
    #[error("subtour: {0}")]
    Subtour(String),
}

/// Check that `assignment[i]` names a valid vehicle for every target and respects the required sets.
pub fn check_assignment(instance: &Instance, assignment: &[usize]) -> Result<(), RecourseError> {
    if assignment.len() != instance.num_targets() {
        return Err(RecourseError::Assignment(format!(
            "{} entries for {} targets",
            assignment.len(),
            instance.num_targets()
        )));
    }
    for (i, &k) in assignment.iter().enumerate() {
        if k >= instance.num_vehicles() {
            return Err(RecourseError::Assignment(format!("target {i} assigned to missing vehicle {k}")));
        }
        if let Some(owner) = instance.required_owner(i) {
            if owner != k {
                return Err(RecourseError::Required(format!("target {i} requires vehicle {owner}, assigned to {k}")));
            }
        }
    }
    Ok(())
}

/// Excess service time of each vehicle in scenario `scenario`:
/// `z_k = max(0, sum_i (tau_ik - tau_bar_ik) y_ik)`.
pub fn recourse_value(instance: &Instance, assignment: &[usize], scenario: usize) -> Result<Vec<f64>, RecourseError> {
    check_assignment(instance, assignment)?;
    Ok(excess_unchecked(instance, assignment, scenario))
}

fn excess_unchecked(instance: &Instance, assignment: &[usize], scenario: usize) -> Vec<f64> {
    let mut total = vec![0.0; instance.num_vehicles()];
    for (i, &k) in assignment.iter().enumerate() {
        total[k] += instance.scenarios.tau(i, k, scenario) - instance.tau_bar[i][k];
    }
    total.into_iter().map(|t| t.max(0.0)).collect()
}

/// `sum_w p_w sum_k gamma_k z_k^w`, summed scenario-major.
pub fn expected_penalty(instance: &Instance, assignment: &[usize]) -> Result<f64, RecourseError> {
    check_assignment(instance, assignment)?;
    let mut total = 0.0;
    for (w, &p) in instance.scenarios.prob().iter().enumerate() {
        let z = excess_unchecked(instance, assignment, w);
        let mut scenario_cost = 0.0;
        for (k, zk) in z.into_iter().enumerate() {
            scenario_cost += instance.vehicles[k].gamma * zk;
        }
        total += p * scenario_cost;
    }
    Ok(total)
}

/// Vehicle of each target, read from tours. Fails if a target is missing or repeated.
pub fn assignment_from_tours(num_targets: usize, tours: &[Vec<usize>]) -> Result<Vec<usize>, RecourseError> {
    let mut owner = vec![None; num_targets];
    for (k, tour) in tours.iter().enumerate() {
        for &i in tour {
            if i >= num_targets {
                return Err(RecourseError::Assignment(format!("tour {k} visits unknown target {i}")));
            }
            if let Some(other) = owner[i].replace(k) {
                return Err(RecourseError::Assignment(format!("target {i} served by vehicles {other} and {k}")));
            }
        }
    }
    owner
        .into_iter()
        .enumerate()
        .map(|(i, o)| o.ok_or_else(|| RecourseError::Assignment(format!("target {i} is not served"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstStageValue {
    pub first_stage_cost: f64,
    pub expected_penalty: f64,
    pub total: f64,
}

/// Rebuild tours from per-vehicle arcs (local vertex ids, the depot is
/// `num_targets`) and an assignment, checking the first-stage constraints.
pub fn tours_from_arcs(
    instance: &Instance,
    arcs: &[Vec<(usize, usize)>],
    assignment: &[usize],
) -> Result<Vec<Vec<usize>>, RecourseError> {
    check_assignment(instance, assignment)?;
    let nt = instance.num_targets();
    let depot = nt;
    if arcs.len() != instance.num_vehicles() {
        return Err(RecourseError::Assignment(format!("arcs given for {} of {} vehicles", arcs.len(), instance.num_vehicles())));
    }
    let mut tours = Vec::with_capacity(arcs.len());
    for (k, vehicle_arcs) in arcs.iter().enumerate() {
        let mut succ = vec![None; nt + 1];
        let mut indeg = vec![0usize; nt + 1];
        for &(u, v) in vehicle_arcs {
            if u > nt || v > nt || u == v {
                return Err(RecourseError::Degree(format!("vehicle {k} has invalid arc ({u}, {v})")));
            }
            if succ[u].replace(v).is_some() {
                return Err(RecourseError::Degree(format!("vertex {u} of vehicle {k} has out-degree above one")));
            }
            indeg[v] += 1;
        }
        for i in 0..nt {
            let y = usize::from(assignment[i] == k);
            let outdeg = usize::from(succ[i].is_some());
            if outdeg != y || indeg[i] != y {
                return Err(RecourseError::Degree(format!(
                    "target {i} of vehicle {k}: out {outdeg}, in {}, assigned {y}",
                    indeg[i]
                )));
            }
        }
        let served = assignment.contains(&k);
        let h = usize::from(served);
        if usize::from(succ[depot].is_some()) != h || indeg[depot] != h {
            return Err(RecourseError::DepotDegree(format!("vehicle {k} leaves or enters its depot inconsistently")));
        }
        let mut tour = Vec::new();
        if let Some(mut cur) = succ[depot] {
            while cur != depot {
                tour.push(cur);
                cur = succ[cur].expect("degree check guarantees a successor");
            }
        }
        let count = assignment.iter().filter(|&&a| a == k).count();
        if tour.len() != count {
            return Err(RecourseError::Subtour(format!(
                "vehicle {k}: depot tour covers {} of {count} assigned targets",
                tour.len()
            )));
        }
        tours.push(tour);
    }
    Ok(tours)
}

fn first_stage_cost(instance: &Instance, tours: &[Vec<usize>]) -> f64 {
    let depot = instance.num_targets();
    let mut total = 0.0;
    for (k, tour) in tours.iter().enumerate() {
        if tour.is_empty() {
            continue;
        }
        let c = cost_matrix(&instance.vehicle_poses(k), instance.vehicles[k].turn_radius);
        let mut prev = depot;
        for &i in tour {
            total += c.get(prev, i);
            prev = i;
        }
        total += c.get(prev, depot);
    }
    total
}

/// The two-stage objective with the first stage fixed to the given arcs and assignment.
pub fn evaluate_fixed_first_stage(
    instance: &Instance,
    arcs: &[Vec<(usize, usize)>],
    assignment: &[usize],
) -> Result<FirstStageValue, RecourseError> {
    let tours = tours_from_arcs(instance, arcs, assignment)?;
    evaluate_tours(instance, &tours)
}

/// Same as [`evaluate_fixed_first_stage`] for tours given as target sequences.
pub fn evaluate_tours(instance: &Instance, tours: &[Vec<usize>]) -> Result<FirstStageValue, RecourseError> {
    if tours.len() != instance.num_vehicles() {
        return Err(RecourseError::Assignment(format!("{} tours for {} vehicles", tours.len(), instance.num_vehicles())));
    }
    let assignment = assignment_from_tours(instance.num_targets(), tours)?;
    let penalty = expected_penalty(instance, &assignment)?;
    let first = first_stage_cost(instance, tours);
    Ok(FirstStageValue { first_stage_cost: first, expected_penalty: penalty, total: first + penalty })
}

/// First-stage cost and expected penalty of a solution's tours.
pub fn objective_split(instance: &Instance, solution: &Solution) -> Result<(f64, f64), RecourseError> {
    let v = evaluate_tours(instance, &solution.tours)?;
    Ok((v.first_stage_cost, v.expected_penalty))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VssReport {
    pub instance: String,
    /// Optimal two-stage objective.
    pub s_star: f64,
    /// Two-stage objective at the expected-value solution's first stage.
    pub d_star: f64,
    pub vss: f64,
    pub evp_objective: f64,
    pub s_first_stage: f64,
    pub d_first_stage: f64,
    #[serde(with = "crate::bnc::float_serde")]
    pub s_bound: f64,
    #[serde(with = "crate::bnc::float_serde")]
    pub evp_bound: f64,
    pub s_time_s: f64,
    pub evp_time_s: f64,
    /// Both solves closed their gaps.
    pub certified: bool,
    pub stochastic_tours: Vec<Vec<usize>>,
    pub evp_tours: Vec<Vec<usize>>,
}

/// Solve both models with the same parameters and compare.
pub fn compute_vss(instance: &Instance, params: &SolverParams) -> VssReport {
    let (sm, smap) = build_two_stage(instance);
    let s = solve_model(&sm, &smap, params);
    let (em, emap) = build_evp(instance);
    let e = solve_model(&em, &emap, params);
    vss_from_solutions(instance, &s, &e)
}

pub fn vss_from_solutions(instance: &Instance, stochastic: &Solution, evp: &Solution) -> VssReport {
    let d = evaluate_tours(instance, &evp.tours).expect("solver tours are feasible");
    // both sides through the same evaluation, so equal tours give exactly zero
    let s = evaluate_tours(instance, &stochastic.tours).expect("solver tours are feasible");
    VssReport {
        instance: instance.name.clone(),
        s_star: s.total,
        d_star: d.total,
        vss: d.total - s.total,
        evp_objective: evp.objective,
        s_first_stage: stochastic.first_stage_cost,
        d_first_stage: d.first_stage_cost,
        s_bound: stochastic.bound,
        evp_bound: evp.bound,
        s_time_s: stochastic.stats.wall_time_s,
        evp_time_s: evp.stats.wall_time_s,
        certified: stochastic.is_certified() && evp.is_certified(),
        stochastic_tours: stochastic.tours.clone(),
        evp_tours: evp.tours.clone(),
    }
}
