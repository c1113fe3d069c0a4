//! LP-based branch-and-cut with lazily separated connectivity cuts.

pub mod float_serde;
mod heuristic;
mod maxflow;
mod separation;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use heuristic::{construct, improve, Eligibility, Evaluator};
pub use maxflow::{max_flow, FlowGraph};
pub use separation::{build_support_graph, separate_fractional, separate_integer, AnchorPolicy, Cut, SupportGraph};

use crate::instance::Instance;
use crate::lp::{Basis, LpState, LpStatus, SimplexParams};
use crate::model::{build_two_stage, LinearModel, ModelKind, VariableMap};

/// When minimum-cut separation runs on fractional points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FractionalSeparation {
    Off,
    Always,
    /// Every node up to `max_depth`, then every `every`-th processed node.
    Depth { max_depth: usize, every: u64 },
}

impl FractionalSeparation {
    fn applies(self, depth: usize, node_count: u64) -> bool {
        match self {
            Self::Off => false,
            Self::Always => true,
            Self::Depth { max_depth, every } => depth <= max_depth || (every > 0 && node_count.is_multiple_of(every)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverParams {
    pub time_limit: Duration,
    pub rel_gap: f64,
    pub integrality_tol: f64,
    pub violation_tol: f64,
    pub anchors: AnchorPolicy,
    pub fractional: FractionalSeparation,
    /// Cap on cuts added per separation call (one call covers all vehicles).
    pub max_cuts_per_call: usize,
    pub max_cut_rounds_root: usize,
    pub max_cut_rounds_node: usize,
    /// Emit a progress record every this many nodes (0 disables).
    pub log_interval: u64,
    /// Build a starting incumbent before the root solve.
    pub heuristic: bool,
    pub simplex: SimplexParams,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(3600),
            rel_gap: 1e-6,
            integrality_tol: 1e-6,
            violation_tol: 1e-4,
            anchors: AnchorPolicy::Strongest,
            fractional: FractionalSeparation::Depth { max_depth: 5, every: 10 },
            max_cuts_per_call: 200,
            max_cut_rounds_root: 200,
            max_cut_rounds_node: 20,
            log_interval: 0,
            heuristic: true,
            simplex: SimplexParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Gap closed to the tolerance.
    Optimal,
    /// Stopped by the time limit; the incumbent and bound are reported.
    TimeLimit,
    /// The tree was exhausted but some node LPs failed, so the bound is weaker.
    Incomplete,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub max_depth: usize,
    pub cuts_added: usize,
    pub separation_calls: usize,
    pub lp_iterations: u64,
    pub lp_failures: usize,
    #[serde(with = "float_serde")]
    pub root_bound: f64,
    pub heuristic_objective: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogEvent {
    Incumbent,
    Bound,
    Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub time_s: f64,
    pub nodes: u64,
    pub event: LogEvent,
    pub incumbent: Option<f64>,
    #[serde(with = "float_serde")]
    pub bound: f64,
}

/// Result of a solve. Tours list target ids in visiting order; each tour
/// starts and ends at the vehicle's depot, and an empty tour means the
/// vehicle stays home.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub model: String,
    pub status: SolveStatus,
    pub tours: Vec<Vec<usize>>,
    /// Serving vehicle per target.
    pub assignment: Vec<usize>,
    /// Excess time per vehicle and scenario (one entry per vehicle for the expected-value model).
    pub excess: Vec<Vec<f64>>,
    pub objective: f64,
    pub first_stage_cost: f64,
    pub expected_penalty: f64,
    #[serde(with = "float_serde")]
    pub bound: f64,
    #[serde(with = "float_serde")]
    pub gap: f64,
    pub stats: SolveStats,
    pub cuts: Vec<Cut>,
    pub log: Vec<LogRecord>,
}

impl Solution {
    pub fn is_certified(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Arcs of vehicle `k` as local vertex pairs, with `depot` standing for the depot.
    pub fn arcs(&self, vehicle: usize, depot: usize) -> Vec<(usize, usize)> {
        let tour = &self.tours[vehicle];
        if tour.is_empty() {
            return Vec::new();
        }
        let mut seq = vec![depot];
        seq.extend(tour);
        seq.push(depot);
        seq.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Solve the two-stage stochastic model of `instance`.
pub fn solve(instance: &Instance, params: &SolverParams) -> Solution {
    let (model, map) = build_two_stage(instance);
    solve_model(&model, &map, params)
}

/// Solve a model produced by one of the builders.
pub fn solve_model(model: &LinearModel, map: &VariableMap, params: &SolverParams) -> Solution {
    BranchAndCut::new(model, map, params).run()
}

/// Branching variable for a relaxation point: the most fractional `y`, then
/// `x`, then `h`; ties go to the lowest column index.
pub fn select_branching(point: &[f64], map: &VariableMap, int_tol: f64) -> Option<usize> {
    let nk = map.num_vehicles();
    let ys = map.y_range();
    let xs = 0..map.x_range(nk.saturating_sub(1)).end;
    let hs = (0..nk).map(|k| map.h(k));
    let pick = |cols: &mut dyn Iterator<Item = usize>| {
        let mut best: Option<(usize, f64)> = None;
        for j in cols {
            let v = point[j];
            let frac = v - v.floor();
            if frac <= int_tol || frac >= 1.0 - int_tol {
                continue;
            }
            let score = 0.5 - (frac - 0.5).abs();
            if best.is_none_or(|(_, s)| score > s + 1e-12) {
                best = Some((j, score));
            }
        }
        best.map(|b| b.0)
    };
    pick(&mut ys.into_iter()).or_else(|| pick(&mut xs.into_iter())).or_else(|| pick(&mut hs.into_iter()))
}

/// Tours read off an integer point; `None` unless every vehicle's arcs form
/// at most one cycle, through the depot, covering exactly its assigned targets.
pub fn tours_from_point(point: &[f64], map: &VariableMap) -> Option<Vec<Vec<usize>>> {
    let (nt, depot) = (map.num_targets(), map.depot());
    let mut tours = Vec::with_capacity(map.num_vehicles());
    for k in 0..map.num_vehicles() {
        let assigned: Vec<usize> = (0..nt).filter(|&i| point[map.y(i, k)] > 0.5).collect();
        let succ = |u: usize| (0..=nt).find(|&v| v != u && point[map.x(k, u, v)] > 0.5);
        let mut tour = Vec::new();
        if let Some(mut cur) = succ(depot) {
            while cur != depot {
                if tour.len() > nt || cur >= nt {
                    return None;
                }
                tour.push(cur);
                cur = succ(cur)?;
            }
        }
        let mut sorted = tour.clone();
        sorted.sort_unstable();
        if sorted != assigned {
            return None;
        }
        tours.push(tour);
    }
    Some(tours)
}

struct Node {
    id: u64,
    depth: usize,
    bound: f64,
    fixings: Vec<(usize, f64)>,
    parent: Option<u64>,
    basis: Option<Rc<Basis>>,
}

struct Queued(Node);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // max-heap: smaller bound, then older node, pops first
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.bound.total_cmp(&self.0.bound).then(other.0.id.cmp(&self.0.id))
    }
}

enum NodeOutcome {
    Pruned,
    /// LP bound reached the cutoff.
    Fathomed(f64),
    Branch { bound: f64, col: usize, value: f64, basis: Rc<Basis> },
    Failed,
}

struct BranchAndCut<'a> {
    model: &'a LinearModel,
    map: &'a VariableMap,
    params: &'a SolverParams,
    lp: LpState,
    eval: Evaluator,
    root_lower: Vec<f64>,
    root_upper: Vec<f64>,
    pool: HashSet<Cut>,
    cuts: Vec<Cut>,
    incumbent: Option<(f64, Vec<Vec<usize>>)>,
    stats: SolveStats,
    log: Vec<LogRecord>,
    start: Instant,
    last_bound: f64,
    /// Node whose final basis the LP currently holds.
    lp_owner: Option<u64>,
    applied: Vec<usize>,
    binaries: Vec<usize>,
}

impl<'a> BranchAndCut<'a> {
    fn new(model: &'a LinearModel, map: &'a VariableMap, params: &'a SolverParams) -> Self {
        let start = Instant::now();
        let mut lp = LpState::with_params(model, params.simplex.clone());
        lp.set_deadline(start.checked_add(params.time_limit));
        Self {
            model,
            map,
            params,
            lp,
            eval: Evaluator::new(model, map),
            root_lower: model.columns.iter().map(|c| c.lower).collect(),
            root_upper: model.columns.iter().map(|c| c.upper).collect(),
            pool: HashSet::new(),
            cuts: Vec::new(),
            incumbent: None,
            stats: SolveStats::default(),
            log: Vec::new(),
            start,
            last_bound: f64::NEG_INFINITY,
            lp_owner: None,
            applied: Vec::new(),
            binaries: (0..model.num_columns()).filter(|&j| model.columns[j].integer).collect(),
        }
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |i| i.0)
    }

    fn cutoff(&self) -> f64 {
        let inc = self.incumbent_value();
        inc - (self.params.rel_gap * inc.abs()).max(1e-9)
    }

    fn record(&mut self, event: LogEvent) {
        let inc = self.incumbent.as_ref().map(|i| i.0);
        self.log.push(LogRecord {
            time_s: self.elapsed(),
            nodes: self.stats.nodes,
            event,
            incumbent: inc,
            bound: self.last_bound,
        });
    }

    fn offer(&mut self, tours: Vec<Vec<usize>>) {
        let value = self.eval.objective(&tours);
        if value < self.incumbent_value() {
            self.incumbent = Some((value, tours));
            self.record(LogEvent::Incumbent);
        }
    }

    fn update_bound(&mut self, bound: f64) {
        let bound = bound.min(self.incumbent_value());
        if bound > self.last_bound {
            self.last_bound = bound;
            self.record(LogEvent::Bound);
        }
    }

    fn apply_fixings(&mut self, node: &Node) {
        for &j in &self.applied {
            self.lp.set_column_bounds(j, self.root_lower[j], self.root_upper[j]);
        }
        for &(j, v) in &node.fixings {
            self.lp.set_column_bounds(j, v, v);
        }
        self.applied = node.fixings.iter().map(|f| f.0).collect();
    }

    fn is_integral(&self, point: &[f64]) -> bool {
        let tol = self.params.integrality_tol;
        self.binaries.iter().all(|&j| {
            let v = point[j];
            (v - v.round()).abs() <= tol
        })
    }

    /// Add cuts not yet in the pool; returns how many were new.
    fn add_cuts(&mut self, found: Vec<Cut>) -> usize {
        let mut rows = Vec::new();
        for cut in found {
            if rows.len() >= self.params.max_cuts_per_call {
                break;
            }
            if self.pool.insert(cut.clone()) {
                rows.push(cut.row(self.map));
                self.cuts.push(cut);
            }
        }
        self.lp.add_rows(&rows);
        self.stats.cuts_added += rows.len();
        rows.len()
    }

    fn separate(&mut self, point: &[f64], integral: bool) -> Vec<Cut> {
        self.stats.separation_calls += 1;
        let tol = if integral { self.params.integrality_tol.max(1e-6) } else { self.params.violation_tol };
        let mut found = Vec::new();
        for k in 0..self.map.num_vehicles() {
            let g = build_support_graph(point, self.map, k);
            let cuts = if integral {
                separate_integer(&g, self.params.anchors, tol)
            } else {
                separate_fractional(&g, self.params.anchors, tol)
            };
            found.extend(cuts.into_iter().filter(|c| c.violation(point, self.map) > tol));
        }
        found
    }

    fn process(&mut self, node: &Node) -> NodeOutcome {
        let warm_from_parent = node.parent.is_some() && node.parent == self.lp_owner;
        let mut first = true;
        let mut rounds = 0usize;
        let max_rounds = if node.depth == 0 { self.params.max_cut_rounds_root } else { self.params.max_cut_rounds_node };
        let fractional = self.params.fractional.applies(node.depth, self.stats.nodes);
        let mut history: Vec<f64> = Vec::new();
        loop {
            if self.elapsed() > self.params.time_limit.as_secs_f64() {
                return NodeOutcome::Failed;
            }
            let before = self.lp.iterations();
            let sol = if first && !warm_from_parent {
                self.lp.solve(node.basis.as_deref())
            } else {
                self.lp.resolve()
            };
            first = false;
            self.stats.lp_iterations += self.lp.iterations() - before;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return NodeOutcome::Pruned,
                LpStatus::IterationLimit if self.elapsed() > self.params.time_limit.as_secs_f64() => {
                    return NodeOutcome::Failed;
                }
                LpStatus::Unbounded | LpStatus::IterationLimit => {
                    self.stats.lp_failures += 1;
                    return NodeOutcome::Failed;
                }
            }
            let z = sol.objective;
            if z >= self.cutoff() {
                return NodeOutcome::Fathomed(z);
            }
            let point = sol.primal;
            if self.is_integral(&point) {
                let cuts = self.separate(&point, true);
                if cuts.is_empty() {
                    match tours_from_point(&point, self.map) {
                        Some(tours) => self.offer(tours),
                        None => {
                            self.stats.lp_failures += 1;
                            return NodeOutcome::Failed;
                        }
                    }
                    return NodeOutcome::Pruned;
                }
                if self.add_cuts(cuts) == 0 {
                    self.stats.lp_failures += 1;
                    return NodeOutcome::Failed;
                }
                continue;
            }
            history.push(z);
            let tailing = history.len() > 5 && {
                let old = history[history.len() - 6];
                z - old <= 1e-6 * z.abs().max(1.0)
            };
            if fractional && rounds < max_rounds && !tailing {
                let cuts = self.separate(&point, false);
                if !cuts.is_empty() && self.add_cuts(cuts) > 0 {
                    rounds += 1;
                    continue;
                }
            }
            let col = select_branching(&point, self.map, self.params.integrality_tol)
                .expect("a fractional point has a fractional binary");
            return NodeOutcome::Branch { bound: z, col, value: point[col], basis: Rc::new(sol.basis) };
        }
    }

    fn run(mut self) -> Solution {
        if self.params.heuristic {
            let elig = Eligibility::from_bounds(self.map, &self.root_lower, &self.root_upper);
            let tours = construct(&self.eval, &elig);
            self.stats.heuristic_objective = Some(self.eval.objective(&tours));
            self.offer(tours);
        }
        let mut heap: BinaryHeap<Queued> = BinaryHeap::new();
        let mut next_id = 1u64;
        let mut current = Some(Node { id: 0, depth: 0, bound: f64::NEG_INFINITY, fixings: Vec::new(), parent: None, basis: None });
        // lowest bound among nodes closed by the gap tolerance or abandoned
        let mut closed_bound = f64::INFINITY;
        let mut failed = false;
        let mut timed_out = false;

        loop {
            let open_min = heap.peek().map_or(f64::INFINITY, |q| q.0.bound);
            let frontier = current.as_ref().map_or(open_min, |n| n.bound.min(open_min));
            if current.is_some() || !heap.is_empty() {
                self.update_bound(frontier.min(closed_bound));
                let inc = self.incumbent_value();
                if inc.is_finite() && inc - self.last_bound <= self.params.rel_gap * inc.abs() {
                    break;
                }
            }
            if self.elapsed() > self.params.time_limit.as_secs_f64() {
                timed_out = true;
                break;
            }
            let Some(node) = current.take().or_else(|| heap.pop().map(|q| q.0)) else {
                break;
            };
            if node.bound >= self.cutoff() {
                closed_bound = closed_bound.min(node.bound);
                continue;
            }
            self.stats.nodes += 1;
            self.stats.max_depth = self.stats.max_depth.max(node.depth);
            if self.params.log_interval > 0 && self.stats.nodes.is_multiple_of(self.params.log_interval) {
                self.record(LogEvent::Progress);
            }
            self.apply_fixings(&node);
            let outcome = self.process(&node);
            self.lp_owner = Some(node.id);
            if node.depth == 0 {
                self.stats.root_bound = match outcome {
                    NodeOutcome::Branch { bound, .. } | NodeOutcome::Fathomed(bound) => bound,
                    _ => self.incumbent_value(),
                };
            }
            match outcome {
                NodeOutcome::Pruned => {}
                NodeOutcome::Fathomed(b) => closed_bound = closed_bound.min(b.min(self.incumbent_value())),
                NodeOutcome::Failed => {
                    if self.elapsed() > self.params.time_limit.as_secs_f64() {
                        heap.push(Queued(node));
                        timed_out = true;
                        break;
                    }
                    failed = true;
                    closed_bound = closed_bound.min(node.bound);
                }
                NodeOutcome::Branch { bound, col, value, basis } => {
                    let up_first = value >= 0.5;
                    let mut children = [0.0, 1.0].map(|v| {
                        let mut fixings = node.fixings.clone();
                        fixings.push((col, v));
                        let child = Node {
                            id: next_id,
                            depth: node.depth + 1,
                            bound,
                            fixings,
                            parent: Some(node.id),
                            basis: Some(Rc::clone(&basis)),
                        };
                        next_id += 1;
                        child
                    });
                    if up_first {
                        children.swap(0, 1);
                    }
                    let [dive, other] = children;
                    heap.push(Queued(other));
                    current = Some(dive);
                }
            }
        }

        let open_min = heap.peek().map_or(f64::INFINITY, |q| q.0.bound);
        let frontier = current.as_ref().map_or(open_min, |n| n.bound.min(open_min));
        let inc = self.incumbent_value();
        let bound = frontier.min(closed_bound).min(inc).max(self.last_bound.min(inc));
        self.update_bound(bound);
        let gap = if inc.is_finite() { ((inc - bound) / inc.abs().max(1e-10)).max(0.0) } else { f64::INFINITY };
        let status = if timed_out && gap > self.params.rel_gap {
            SolveStatus::TimeLimit
        } else if gap <= self.params.rel_gap {
            SolveStatus::Optimal
        } else if failed {
            SolveStatus::Incomplete
        } else {
            SolveStatus::Optimal
        };
        self.stats.wall_time_s = self.elapsed();
        self.finish(status, bound, gap)
    }

    fn finish(self, status: SolveStatus, bound: f64, gap: f64) -> Solution {
        let (objective, tours) = self.incumbent.clone().unwrap_or_else(|| {
            let elig = Eligibility::from_bounds(self.map, &self.root_lower, &self.root_upper);
            let tours = construct(&self.eval, &elig);
            (self.eval.objective(&tours), tours)
        });
        let nt = self.map.num_targets();
        let mut assignment = vec![usize::MAX; nt];
        for (k, t) in tours.iter().enumerate() {
            for &i in t {
                assignment[i] = k;
            }
        }
        let model = match self.model.metadata.kind {
            ModelKind::Stochastic => "stochastic",
            ModelKind::ExpectedValue => "evp",
            ModelKind::Generic => "generic",
        };
        Solution {
            model: model.into(),
            status,
            excess: self.eval.excess_matrix(&tours),
            first_stage_cost: self.eval.first_stage(&tours),
            expected_penalty: self.eval.expected_penalty(&tours),
            objective,
            tours,
            assignment,
            bound,
            gap,
            stats: self.stats,
            cuts: self.cuts,
            log: self.log,
        }
    }
}

