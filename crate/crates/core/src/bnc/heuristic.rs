//! Exact evaluation of fixed tours and a greedy construction with local search
//! used as the starting incumbent.

use crate::dubins::CostMatrix;
use crate::model::{LinearModel, Var, VariableMap};

/// One excess row `sum_i a_i y_i + z >= 0` of a vehicle, with `z`'s cost.
#[derive(Debug, Clone)]
struct ExcessRow {
    z_col: usize,
    cost: f64,
    /// `a_i` per target.
    coef: Vec<f64>,
}

/// Evaluates tours against a built model: arc costs plus the cheapest excess
/// variables that satisfy the service rows.
#[derive(Debug, Clone)]
pub struct Evaluator {
    map: VariableMap,
    costs: Vec<CostMatrix>,
    rows: Vec<Vec<ExcessRow>>,
    num_columns: usize,
}

impl Evaluator {
    pub fn new(model: &LinearModel, map: &VariableMap) -> Self {
        let nk = map.num_vehicles();
        let mut rows: Vec<Vec<ExcessRow>> = vec![Vec::new(); nk];
        for row in &model.rows {
            let Some((z_col, vehicle)) = row.coefs.iter().find_map(|&(j, _)| match map.decode(j) {
                Some(Var::Z { vehicle, .. }) => Some((j, vehicle)),
                _ => None,
            }) else {
                continue;
            };
            let mut coef = vec![0.0; map.num_targets()];
            for &(j, a) in &row.coefs {
                if let Some(Var::Y { target, .. }) = map.decode(j) {
                    coef[target] += a;
                }
            }
            rows[vehicle].push(ExcessRow { z_col, cost: model.columns[z_col].obj, coef });
        }
        Self { map: map.clone(), costs: model.metadata.arc_costs.clone(), rows, num_columns: model.num_columns() }
    }

    pub fn map(&self) -> &VariableMap {
        &self.map
    }

    pub fn arc_cost(&self, vehicle: usize, from: usize, to: usize) -> f64 {
        self.costs[vehicle].get(from, to)
    }

    pub fn tour_cost(&self, vehicle: usize, tour: &[usize]) -> f64 {
        let d = self.map.depot();
        match (tour.first(), tour.last()) {
            (Some(&a), Some(&b)) => {
                self.arc_cost(vehicle, d, a)
                    + tour.windows(2).map(|w| self.arc_cost(vehicle, w[0], w[1])).sum::<f64>()
                    + self.arc_cost(vehicle, b, d)
            }
            _ => 0.0,
        }
    }

    /// Minimal excess per row of `vehicle` when it serves `targets`.
    pub fn excess(&self, vehicle: usize, targets: &[usize]) -> Vec<f64> {
        self.rows[vehicle]
            .iter()
            .map(|r| (-targets.iter().map(|&i| r.coef[i]).sum::<f64>()).max(0.0))
            .collect()
    }

    pub fn penalty(&self, vehicle: usize, targets: &[usize]) -> f64 {
        self.rows[vehicle].iter().zip(self.excess(vehicle, targets)).map(|(r, z)| r.cost * z).sum()
    }

    pub fn first_stage(&self, tours: &[Vec<usize>]) -> f64 {
        tours.iter().enumerate().map(|(k, t)| self.tour_cost(k, t)).sum()
    }

    pub fn expected_penalty(&self, tours: &[Vec<usize>]) -> f64 {
        tours.iter().enumerate().map(|(k, t)| self.penalty(k, t)).sum()
    }

    pub fn objective(&self, tours: &[Vec<usize>]) -> f64 {
        self.first_stage(tours) + self.expected_penalty(tours)
    }

    /// Full column vector for the tours.
    pub fn point(&self, tours: &[Vec<usize>]) -> Vec<f64> {
        let mut x = vec![0.0; self.num_columns];
        let d = self.map.depot();
        for (k, tour) in tours.iter().enumerate() {
            if tour.is_empty() {
                continue;
            }
            x[self.map.h(k)] = 1.0;
            let mut prev = d;
            for &i in tour {
                x[self.map.y(i, k)] = 1.0;
                x[self.map.x(k, prev, i)] = 1.0;
                prev = i;
            }
            x[self.map.x(k, prev, d)] = 1.0;
            for (r, z) in self.rows[k].iter().zip(self.excess(k, tour)) {
                x[r.z_col] = z;
            }
        }
        x
    }

    /// Excess values arranged `[vehicle][row]`.
    pub fn excess_matrix(&self, tours: &[Vec<usize>]) -> Vec<Vec<f64>> {
        tours.iter().enumerate().map(|(k, t)| self.excess(k, t)).collect()
    }
}

/// Which vehicles may serve each target, and which target is pinned to which vehicle.
#[derive(Debug, Clone)]
pub struct Eligibility {
    pub allowed: Vec<Vec<bool>>,
    pub pinned: Vec<Option<usize>>,
}

impl Eligibility {
    pub fn from_bounds(map: &VariableMap, lower: &[f64], upper: &[f64]) -> Self {
        let (nt, nk) = (map.num_targets(), map.num_vehicles());
        let mut allowed = vec![vec![false; nk]; nt];
        let mut pinned = vec![None; nt];
        for i in 0..nt {
            for k in 0..nk {
                let c = map.y(i, k);
                allowed[i][k] = upper[c] > 0.5;
                if lower[c] > 0.5 {
                    pinned[i] = Some(k);
                }
            }
        }
        Self { allowed, pinned }
    }
}

/// Cheapest position to insert `t` into `tour`, and the added arc cost.
fn best_insertion(ev: &Evaluator, k: usize, tour: &[usize], t: usize) -> (usize, f64) {
    let d = ev.map().depot();
    let at = |p: usize| if p == 0 || p > tour.len() { d } else { tour[p - 1] };
    let mut best = (0, f64::INFINITY);
    for pos in 0..=tour.len() {
        let (a, b) = (at(pos), if pos == tour.len() { d } else { tour[pos] });
        let delta = if tour.is_empty() {
            ev.arc_cost(k, d, t) + ev.arc_cost(k, t, d)
        } else {
            ev.arc_cost(k, a, t) + ev.arc_cost(k, t, b) - ev.arc_cost(k, a, b)
        };
        if delta < best.1 {
            best = (pos, delta);
        }
    }
    best
}

fn nearest_neighbour(ev: &Evaluator, k: usize, targets: &[usize]) -> Vec<usize> {
    let mut left: Vec<usize> = targets.to_vec();
    let mut tour = Vec::with_capacity(left.len());
    let mut cur = ev.map().depot();
    while !left.is_empty() {
        let (idx, _) = left
            .iter()
            .enumerate()
            .map(|(p, &t)| (p, ev.arc_cost(k, cur, t)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        cur = left.remove(idx);
        tour.push(cur);
    }
    tour
}

/// Greedy insertion for the assignment, nearest-neighbour tours, then
/// relocation moves on the exact objective until no move improves it.
pub fn construct(ev: &Evaluator, elig: &Eligibility) -> Vec<Vec<usize>> {
    let (nt, nk) = (ev.map().num_targets(), ev.map().num_vehicles());
    let mut tours: Vec<Vec<usize>> = vec![Vec::new(); nk];
    for i in 0..nt {
        if let Some(k) = elig.pinned[i] {
            tours[k].push(i);
        }
    }
    for k in 0..nk {
        tours[k] = nearest_neighbour(ev, k, &tours[k]);
    }
    for i in (0..nt).filter(|&i| elig.pinned[i].is_none()) {
        let mut best: Option<(usize, usize, f64)> = None;
        for k in (0..nk).filter(|&k| elig.allowed[i][k]) {
            let (pos, delta) = best_insertion(ev, k, &tours[k], i);
            if best.is_none_or(|b| delta < b.2) {
                best = Some((k, pos, delta));
            }
        }
        let (k, pos, _) = best.expect("every target has an eligible vehicle");
        tours[k].insert(pos, i);
    }
    for k in 0..nk {
        let nn = nearest_neighbour(ev, k, &tours[k]);
        if ev.tour_cost(k, &nn) < ev.tour_cost(k, &tours[k]) {
            tours[k] = nn;
        }
    }
    improve(ev, elig, &mut tours);
    tours
}

/// First-improvement relocation of single targets within and across tours.
pub fn improve(ev: &Evaluator, elig: &Eligibility, tours: &mut [Vec<usize>]) {
    let nk = tours.len();
    let mut vehicle_cost: Vec<f64> = (0..nk).map(|k| ev.tour_cost(k, &tours[k]) + ev.penalty(k, &tours[k])).collect();
    let mut improved = true;
    let mut guard = 0;
    while improved && guard < 10_000 {
        improved = false;
        guard += 1;
        'scan: for from in 0..nk {
            for p in 0..tours[from].len() {
                let t = tours[from][p];
                let mut reduced = tours[from].clone();
                reduced.remove(p);
                let reduced_cost = ev.tour_cost(from, &reduced) + ev.penalty(from, &reduced);
                for to in 0..nk {
                    let ok = if to == from { true } else { elig.pinned[t].is_none() && elig.allowed[t][to] };
                    if !ok {
                        continue;
                    }
                    let base = if to == from { &reduced } else { &tours[to] };
                    let (pos, _) = best_insertion(ev, to, base, t);
                    let mut cand = base.clone();
                    cand.insert(pos, t);
                    let cand_cost = ev.tour_cost(to, &cand) + ev.penalty(to, &cand);
                    let (old, new) = if to == from {
                        (vehicle_cost[from], cand_cost)
                    } else {
                        (vehicle_cost[from] + vehicle_cost[to], reduced_cost + cand_cost)
                    };
                    if new < old - 1e-9 * old.abs().max(1.0) {
                        if to == from {
                            tours[from] = cand;
                            vehicle_cost[from] = cand_cost;
                        } else {
                            tours[from] = reduced;
                            tours[to] = cand;
                            vehicle_cost[from] = reduced_cost;
                            vehicle_cost[to] = cand_cost;
                        }
                        improved = true;
                        break 'scan;
                    }
                }
            }
        }
    }
}
