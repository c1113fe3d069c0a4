//! Exhaustive reference solvers for tiny instances.

use std::collections::HashMap;

use thiserror::Error;

use crate::bnc::{FlowGraph, Solution, SolveStats, SolveStatus};
use crate::dubins::{cost_matrix, CostMatrix};
use crate::instance::Instance;
use crate::recourse::{expected_penalty, recourse_value};

pub const MAX_ORACLE_TARGETS: usize = 9;
pub const MAX_ORACLE_ASSIGNMENTS: u64 = 1_000_000;
pub const MAX_MIN_CUT_VERTICES: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} is {value}, above the limit of {limit}")]
    TooLarge { what: &'static str, value: u64, limit: u64 },
}

/// Cheapest tour from the depot through exactly `targets`, by trying every order.
fn best_order(costs: &CostMatrix, depot: usize, targets: &[usize]) -> (f64, Vec<usize>) {
    fn walk(
        costs: &CostMatrix,
        depot: usize,
        prefix: &mut Vec<usize>,
        rest: &mut Vec<usize>,
        cost: f64,
        best: &mut (f64, Vec<usize>),
    ) {
        if rest.is_empty() {
            let last = *prefix.last().unwrap_or(&depot);
            let total = if prefix.is_empty() { 0.0 } else { cost + costs.get(last, depot) };
            if total < best.0 {
                *best = (total, prefix.clone());
            }
            return;
        }
        let from = *prefix.last().unwrap_or(&depot);
        for p in 0..rest.len() {
            let t = rest.remove(p);
            prefix.push(t);
            walk(costs, depot, prefix, rest, cost + costs.get(from, t), best);
            prefix.pop();
            rest.insert(p, t);
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    walk(costs, depot, &mut Vec::new(), &mut targets.to_vec(), 0.0, &mut best);
    best
}

/// Exact optimum by enumerating every assignment of the unrestricted targets
/// and every visiting order per vehicle.
pub fn brute_force_solve(instance: &Instance) -> Result<Solution, OracleError> {
    let (nt, nk) = (instance.num_targets(), instance.num_vehicles());
    if nt > MAX_ORACLE_TARGETS {
        return Err(OracleError::TooLarge { what: "target count", value: nt as u64, limit: MAX_ORACLE_TARGETS as u64 });
    }
    let common: Vec<usize> = (0..nt).filter(|&i| instance.required_owner(i).is_none()).collect();
    let count = (nk as u64).checked_pow(common.len() as u32).unwrap_or(u64::MAX);
    if count > MAX_ORACLE_ASSIGNMENTS {
        return Err(OracleError::TooLarge { what: "assignment count", value: count, limit: MAX_ORACLE_ASSIGNMENTS });
    }
    let costs: Vec<CostMatrix> =
        (0..nk).map(|k| cost_matrix(&instance.vehicle_poses(k), instance.vehicles[k].turn_radius)).collect();
    let mut tour_memo: HashMap<(usize, u32), (f64, Vec<usize>)> = HashMap::new();

    let mut assignment: Vec<usize> = (0..nt).map(|i| instance.required_owner(i).unwrap_or(0)).collect();
    let mut best: Option<(f64, f64, f64, Vec<usize>, Vec<Vec<usize>>)> = None;
    for index in 0..count {
        let mut rest = index;
        for &i in &common {
            assignment[i] = (rest % nk as u64) as usize;
            rest /= nk as u64;
        }
        let mut first = 0.0;
        let mut tours = Vec::with_capacity(nk);
        for k in 0..nk {
            let mask = (0..nt).filter(|&i| assignment[i] == k).fold(0u32, |m, i| m | (1 << i));
            let (c, order) = tour_memo
                .entry((k, mask))
                .or_insert_with(|| {
                    let set: Vec<usize> = (0..nt).filter(|&i| mask & (1 << i) != 0).collect();
                    best_order(&costs[k], nt, &set)
                })
                .clone();
            first += c;
            tours.push(order);
        }
        let penalty = expected_penalty(instance, &assignment).expect("enumerated assignments are valid");
        let total = first + penalty;
        if best.as_ref().is_none_or(|b| total < b.0) {
            best = Some((total, first, penalty, assignment.clone(), tours));
        }
    }
    let (objective, first, penalty, assignment, tours) = best.expect("at least one assignment exists");
    let excess_by_scenario: Vec<Vec<f64>> = (0..instance.num_scenarios())
        .map(|w| recourse_value(instance, &assignment, w).expect("valid assignment"))
        .collect();
    let excess = (0..nk).map(|k| excess_by_scenario.iter().map(|z| z[k]).collect()).collect();
    Ok(Solution {
        model: "stochastic".into(),
        status: SolveStatus::Optimal,
        tours,
        assignment,
        excess,
        objective,
        first_stage_cost: first,
        expected_penalty: penalty,
        bound: objective,
        gap: 0.0,
        stats: SolveStats::default(),
        cuts: Vec::new(),
        log: Vec::new(),
    })
}

/// Minimum `s`-`t` cut by trying every sink side. Ties prefer the smaller
/// sink side, then the lexicographically smaller one.
pub fn brute_force_min_cut(graph: &FlowGraph, s: usize, t: usize) -> Result<(f64, Vec<usize>), OracleError> {
    let n = graph.num_vertices();
    if n > MAX_MIN_CUT_VERTICES {
        return Err(OracleError::TooLarge { what: "vertex count", value: n as u64, limit: MAX_MIN_CUT_VERTICES as u64 });
    }
    let free: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1 << free.len()) {
        let mut sink = vec![false; n];
        sink[t] = true;
        for (b, &v) in free.iter().enumerate() {
            if mask & (1 << b) != 0 {
                sink[v] = true;
            }
        }
        let value = graph.cut_capacity(&sink);
        let set: Vec<usize> = (0..n).filter(|&v| sink[v]).collect();
        let better = match &best {
            None => true,
            Some((bv, bs)) => {
                if (value - bv).abs() > 1e-12 {
                    value < *bv
                } else {
                    (set.len(), &set) < (bs.len(), bs)
                }
            }
        };
        if better {
            best = Some((value, set));
        }
    }
    Ok(best.expect("the sink-only side is always a cut"))
}
