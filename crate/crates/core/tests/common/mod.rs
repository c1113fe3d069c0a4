#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochpath_core::instance::{generate_instance, GenerationConfig, Instance};
use stochpath_core::lp::LpSolution;
use stochpath_core::model::{Column, LinearModel, ModelKind, Row, Sense};

/// Random coordinates in a 1000 x 1000 square.
pub fn random_coords(num: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..num).map(|_| (rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0))).collect()
}

pub fn random_instance(targets: usize, vehicles: usize, required: usize, scenarios: usize, seed: u64) -> Instance {
    generate_instance("rand", &random_coords(targets, seed), vehicles, required, scenarios, seed, GenerationConfig::default())
        .expect("valid generation request")
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Solve a square system by Gaussian elimination with partial pivoting.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum of `c.x` over the basic feasible solutions of `A x = b, x >= 0`.
pub fn vertex_enumeration(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let (m, n) = (a.len(), c.len());
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let sq = a.iter().map(|row| cols.iter().map(|&j| row[j]).collect()).collect();
        if let Some(xb) = solve_square(sq, b.to_vec()) {
            if xb.iter().all(|&v| v >= -1e-9) {
                let obj: f64 = cols.iter().zip(&xb).map(|(&j, v)| c[j] * v).sum();
                best = Some(best.map_or(obj, |o: f64| o.min(obj)));
            }
        }
    }
    best
}

pub fn build_lp(c: &[f64], bounds: &[(f64, f64)], rows: &[(Vec<(usize, f64)>, Sense, f64)]) -> LinearModel {
    let mut m = LinearModel::new(ModelKind::Generic, "p");
    for (j, (&cj, &(lo, hi))) in c.iter().zip(bounds).enumerate() {
        m.add_column(Column::continuous(format!("x{j}"), cj, lo, hi));
    }
    for (i, (coefs, sense, rhs)) in rows.iter().enumerate() {
        m.add_row(Row::new(format!("r{i}"), coefs.clone(), *sense, *rhs));
    }
    m
}

/// Primal residual, dual infeasibility and |primal - dual| objective gap, from the model alone.
pub fn certificate(m: &LinearModel, s: &LpSolution) -> (f64, f64, f64) {
    let mut residual: f64 = 0.0;
    for (j, col) in m.columns.iter().enumerate() {
        residual = residual.max(col.lower - s.primal[j]).max(s.primal[j] - col.upper);
    }
    for r in &m.rows {
        residual = residual.max(r.violation(&s.primal));
    }
    let mut dual_inf: f64 = 0.0;
    let mut dual_obj = 0.0;
    for (r, &pi) in m.rows.iter().zip(&s.dual) {
        let (lo, hi) = r.sense.activity_bounds(r.rhs);
        if pi > 0.0 {
            if lo.is_finite() { dual_obj += pi * lo } else { dual_inf = dual_inf.max(pi) }
        } else if pi < 0.0 {
            if hi.is_finite() { dual_obj += pi * hi } else { dual_inf = dual_inf.max(-pi) }
        }
    }
    for (j, col) in m.columns.iter().enumerate() {
        let d = col.obj - m.rows.iter().zip(&s.dual).map(|(r, pi)| {
            r.coefs.iter().filter(|(k, _)| *k == j).map(|(_, a)| a * pi).sum::<f64>()
        }).sum::<f64>();
        if d > 0.0 {
            if col.lower.is_finite() { dual_obj += d * col.lower } else { dual_inf = dual_inf.max(d) }
        } else if d < 0.0 {
            if col.upper.is_finite() { dual_obj += d * col.upper } else { dual_inf = dual_inf.max(-d) }
        }
    }
    (residual, dual_inf, (dual_obj - s.objective).abs())
}

/// Random digraph on `n` vertices; each ordered pair gets an arc with
/// probability `density` and a capacity drawn from [0, 1].
pub fn random_flow_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> stochpath_core::bnc::FlowGraph {
    let mut g = stochpath_core::bnc::FlowGraph::new(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(density) {
                g.add_arc(u, v, rng.random_range(0.0..=1.0));
            }
        }
    }
    g
}

/// Full column vector of the model for the given tours.
pub fn point_for_tours(model: &LinearModel, map: &stochpath_core::model::VariableMap, tours: &[Vec<usize>]) -> Vec<f64> {
    stochpath_core::bnc::Evaluator::new(model, map).point(tours)
}

/// The model with every first-stage column fixed to its value at `tours`;
/// only the excess variables remain free.
pub fn fix_first_stage(model: &LinearModel, map: &stochpath_core::model::VariableMap, tours: &[Vec<usize>]) -> LinearModel {
    let point = point_for_tours(model, map, tours);
    let mut fixed = model.clone();
    let z = map.z_range();
    for (j, col) in fixed.columns.iter_mut().enumerate() {
        if !z.contains(&j) {
            col.lower = point[j];
            col.upper = point[j];
        }
    }
    fixed
}

/// The instance with its scenario set collapsed to the single expected scenario.
pub fn expected_value_instance(inst: &Instance) -> Instance {
    let (nt, nk) = (inst.num_targets(), inst.num_vehicles());
    let tau = (0..nt).map(|i| (0..nk).map(|k| vec![inst.scenarios.expected_tau(i, k)]).collect()).collect();
    let mut out = inst.clone();
    out.scenarios = stochpath_core::instance::ScenarioSet::new(tau, vec![1.0]);
    out
}

/// Arc set of each vehicle's tour, sorted.
pub fn arc_sets(tours: &[Vec<usize>], depot: usize) -> Vec<Vec<(usize, usize)>> {
    tours
        .iter()
        .map(|t| {
            if t.is_empty() {
                return Vec::new();
            }
            let mut seq = vec![depot];
            seq.extend(t);
            seq.push(depot);
            let mut arcs: Vec<_> = seq.windows(2).map(|w| (w[0], w[1])).collect();
            arcs.sort_unstable();
            arcs
        })
        .collect()
}

/// Small instance used by the separation checks.
pub fn separation_instance(seed: u64) -> Instance {
    random_instance(6 + (seed % 3) as usize, 1 + (seed % 2) as usize, 0, 3, seed)
}

/// Relaxation points along a cutting-plane loop on the root LP, with the cuts
/// each point produced.
pub fn separation_trace(seed: u64) -> (stochpath_core::model::LinearModel, stochpath_core::model::VariableMap, Vec<(Vec<f64>, Vec<stochpath_core::bnc::Cut>)>) {
    let inst = separation_instance(seed);
    let nk = inst.num_vehicles();
    let (model, map) = stochpath_core::model::build_two_stage(&inst);
    let mut lp = stochpath_core::lp::LpState::new(&model);
    let mut sol = lp.solve(None);
    let mut trace = Vec::new();
    for _ in 0..30 {
        assert!(sol.is_optimal());
        let mut cuts = Vec::new();
        for k in 0..nk {
            let g = stochpath_core::bnc::build_support_graph(&sol.primal, &map, k);
            cuts.extend(stochpath_core::bnc::separate_fractional(&g, stochpath_core::bnc::AnchorPolicy::All, 1e-4));
            cuts.extend(stochpath_core::bnc::separate_integer(&g, stochpath_core::bnc::AnchorPolicy::All, 1e-4));
        }
        if cuts.is_empty() {
            break;
        }
        let rows: Vec<_> = cuts.iter().map(|c| c.row(&map)).collect();
        trace.push((sol.primal.clone(), cuts));
        sol = lp.add_rows_and_reoptimize(&rows);
    }
    (model, map, trace)
}
