//! Bounded-variable revised simplex over `A x - s = 0`, where every row has a
//! logical variable `s_i` carrying the row bounds. The basis inverse is kept
//! explicitly as a dense `m x m` matrix and updated in product form.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Basis, LpSolution, LpStatus, SimplexParams, VarStatus};

/// Smallest pivot accepted when rebuilding the inverse from a basis.
const SINGULAR_TOL: f64 = 1e-9;
/// Row residual above which the inverse is rebuilt.
const DRIFT_TOL: f64 = 1e-8;

pub struct Simplex {
    params: SimplexParams,
    n: usize,
    m: usize,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    status: Vec<VarStatus>,
    /// Basic variable at each basis position.
    head: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    /// Row-major inverse; row `p` belongs to basis position `p`, column `i` to constraint row `i`.
    binv: Vec<f64>,
    factored: bool,
    /// Nonbasic values changed since the basic values were last computed.
    primal_stale: bool,
    since_refactor: usize,
    iterations: u64,
    deadline: Option<Instant>,
    col_work: Vec<f64>,
    row_work: Vec<f64>,
}

enum PrimalStep {
    Flip,
    Pivot { pos: usize, to_upper: bool },
}

impl Simplex {
    /// Problem with structural columns only; rows are appended with [`Simplex::add_row`].
    pub fn new(cost: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, params: SimplexParams) -> Self {
        let n = cost.len();
        assert_eq!(lower.len(), n);
        assert_eq!(upper.len(), n);
        let mut s = Self {
            params,
            n,
            m: 0,
            cost,
            lower,
            upper,
            cols: vec![Vec::new(); n],
            rows: Vec::new(),
            status: Vec::with_capacity(n),
            head: Vec::new(),
            x: vec![0.0; n],
            d: Vec::new(),
            binv: Vec::new(),
            factored: false,
            primal_stale: false,
            since_refactor: 0,
            iterations: 0,
            deadline: None,
            col_work: Vec::new(),
            row_work: Vec::new(),
        };
        for j in 0..n {
            let st = s.default_nonbasic(j);
            s.status.push(st);
            s.x[j] = s.nonbasic_value(j, st);
        }
        s.d = s.cost.clone();
        s
    }

    pub fn num_columns(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    /// Stop with `IterationLimit` once this instant passes.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    fn out_of_budget(&self) -> bool {
        self.iterations >= self.params.max_iterations
            || (self.iterations.is_multiple_of(32) && self.deadline.is_some_and(|d| Instant::now() >= d))
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn column_bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    fn default_nonbasic(&self, j: usize) -> VarStatus {
        if self.lower[j].is_finite() {
            VarStatus::AtLower
        } else if self.upper[j].is_finite() {
            VarStatus::AtUpper
        } else {
            VarStatus::Free
        }
    }

    fn nonbasic_value(&self, j: usize, st: VarStatus) -> f64 {
        match st {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            VarStatus::Free | VarStatus::Basic => 0.0,
        }
    }

    /// Append a row `lo <= a.x <= hi`. Its logical enters the basis.
    pub fn add_row(&mut self, coefs: &[(usize, f64)], lo: f64, hi: f64) {
        self.add_rows(std::iter::once((coefs, lo, hi)));
    }

    /// Append rows; the current basis is extended with their logicals so
    /// that a dual feasible basis stays dual feasible.
    pub fn add_rows<'a, I>(&mut self, new_rows: I)
    where
        I: IntoIterator<Item = (&'a [(usize, f64)], f64, f64)>,
    {
        let old_m = self.m;
        for (coefs, lo, hi) in new_rows {
            let i = self.m;
            let mut row: Vec<(usize, f64)> = coefs.iter().copied().filter(|&(_, a)| a != 0.0).collect();
            row.sort_unstable_by_key(|&(j, _)| j);
            for &(j, a) in &row {
                assert!(j < self.n, "row references missing column {j}");
                self.cols[j].push((i, a));
            }
            let activity: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum();
            self.rows.push(row);
            self.cost.push(0.0);
            self.lower.push(lo);
            self.upper.push(hi);
            self.status.push(VarStatus::Basic);
            self.x.push(activity);
            self.d.push(0.0);
            self.head.push(self.n + i);
            self.m += 1;
        }
        if self.m == old_m {
            return;
        }
        if self.factored {
            self.extend_inverse(old_m);
        }
    }

    /// Grow the inverse for rows `old_m..m`, whose logicals are basic at the
    /// matching positions: the new inverse row is `a_B^T B^-1` with `-1` on the diagonal.
    fn extend_inverse(&mut self, old_m: usize) {
        let m = self.m;
        let mut binv = vec![0.0; m * m];
        for p in 0..old_m {
            binv[p * m..p * m + old_m].copy_from_slice(&self.binv[p * old_m..(p + 1) * old_m]);
        }
        let mut pos_of = vec![usize::MAX; self.n];
        for (p, &j) in self.head[..old_m].iter().enumerate() {
            if j < self.n {
                pos_of[j] = p;
            }
        }
        for i in old_m..m {
            let mut new_row = vec![0.0; m];
            for &(j, a) in &self.rows[i] {
                let p = pos_of[j];
                if p != usize::MAX {
                    let src = &binv[p * m..p * m + old_m];
                    for (dst, &b) in new_row[..old_m].iter_mut().zip(src) {
                        *dst += a * b;
                    }
                }
            }
            new_row[i] = -1.0;
            binv[i * m..(i + 1) * m].copy_from_slice(&new_row);
        }
        self.binv = binv;
    }

    /// Change bounds of a structural column. A nonbasic column moves to the new bound.
    pub fn set_column_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        assert!(j < self.n);
        if self.lower[j] == lo && self.upper[j] == hi {
            return;
        }
        self.lower[j] = lo;
        self.upper[j] = hi;
        if self.status[j] != VarStatus::Basic {
            let st = match self.status[j] {
                VarStatus::AtUpper if hi.is_finite() => VarStatus::AtUpper,
                VarStatus::AtLower if lo.is_finite() => VarStatus::AtLower,
                _ => self.default_nonbasic(j),
            };
            let st = if st == VarStatus::AtLower && self.d.get(j).is_some_and(|&dj| dj < 0.0) && hi.is_finite() {
                VarStatus::AtUpper
            } else if st == VarStatus::AtUpper && self.d.get(j).is_some_and(|&dj| dj > 0.0) && lo.is_finite() {
                VarStatus::AtLower
            } else {
                st
            };
            self.status[j] = st;
            let v = self.nonbasic_value(j, st);
            if v != self.x[j] {
                self.x[j] = v;
                self.primal_stale = true;
            }
        }
    }

    pub fn basis(&self) -> Basis {
        Basis { num_columns: self.n, status: self.status.clone() }
    }

    /// Install a basis. Missing trailing logicals (rows added after the basis
    /// was taken) become basic; an inconsistent basis falls back to the slack basis.
    pub fn set_basis(&mut self, basis: &Basis) {
        assert_eq!(basis.num_columns, self.n, "basis belongs to a different problem");
        let mut status = basis.status.clone();
        status.truncate(self.n + self.m);
        while status.len() < self.n + self.m {
            status.push(VarStatus::Basic);
        }
        let basic = status.iter().filter(|s| **s == VarStatus::Basic).count();
        if basic != self.m {
            self.set_slack_basis();
            return;
        }
        for j in 0..self.n + self.m {
            status[j] = self.sanitize_status(j, status[j]);
        }
        self.status = status;
        self.head = (0..self.n + self.m).filter(|&j| self.status[j] == VarStatus::Basic).collect();
        self.refresh();
    }

    fn sanitize_status(&self, j: usize, st: VarStatus) -> VarStatus {
        match st {
            VarStatus::Basic => VarStatus::Basic,
            VarStatus::AtLower if self.lower[j].is_finite() => VarStatus::AtLower,
            VarStatus::AtUpper if self.upper[j].is_finite() => VarStatus::AtUpper,
            _ => self.default_nonbasic(j),
        }
    }

    pub fn set_slack_basis(&mut self) {
        for j in 0..self.n {
            self.status[j] = self.default_nonbasic(j);
        }
        for i in 0..self.m {
            self.status[self.n + i] = VarStatus::Basic;
        }
        self.head = (self.n..self.n + self.m).collect();
        self.refresh();
    }

    /// Rebuild the inverse, basic values and reduced costs from scratch.
    fn refresh(&mut self) {
        for j in 0..self.n + self.m {
            if self.status[j] != VarStatus::Basic {
                self.x[j] = self.nonbasic_value(j, self.status[j]);
            }
        }
        self.refactor();
        self.compute_primal();
        self.compute_duals();
    }

    fn ensure_factored(&mut self) {
        if !self.factored {
            if self.head.len() != self.m {
                self.head = (0..self.n + self.m).filter(|&j| self.status[j] == VarStatus::Basic).collect();
            }
            self.refresh();
        }
    }

    /// Reinversion: start from the all-logical basis (`B = -I`) and pivot the
    /// structural basic columns in, sparsest first, each at the free logical
    /// slot with the largest magnitude. Dependent columns are dropped from the basis.
    fn refactor(&mut self) {
        let (n, m) = (self.n, self.m);
        self.binv.clear();
        self.binv.resize(m * m, 0.0);
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
        let mut slot_free: Vec<bool> = (0..m).map(|i| self.status[n + i] != VarStatus::Basic).collect();
        let mut head: Vec<usize> = (n..n + m).collect();
        let mut structural: Vec<usize> = (0..n).filter(|&j| self.status[j] == VarStatus::Basic).collect();
        structural.sort_by_key(|&j| (self.cols[j].len(), j));
        let mut alpha = vec![0.0; m];
        for q in structural {
            self.ftran_into(q, &mut alpha);
            let mut best = None;
            let mut best_abs = SINGULAR_TOL;
            for (p, &a) in alpha.iter().enumerate() {
                if slot_free[p] && a.abs() > best_abs {
                    best_abs = a.abs();
                    best = Some(p);
                }
            }
            match best {
                Some(p) => {
                    self.pivot_inverse(p, &alpha);
                    slot_free[p] = false;
                    head[p] = q;
                }
                None => {
                    let st = self.nearest_bound_status(q);
                    self.status[q] = st;
                    self.x[q] = self.nonbasic_value(q, st);
                }
            }
        }
        for (p, free) in slot_free.into_iter().enumerate() {
            if free {
                // a dropped structural left this logical in the basis
                self.status[n + p] = VarStatus::Basic;
            }
        }
        self.head = head;
        self.factored = true;
        self.since_refactor = 0;
    }

    fn nearest_bound_status(&self, j: usize) -> VarStatus {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if (self.x[j] - lo).abs() <= (hi - self.x[j]).abs() {
                    VarStatus::AtLower
                } else {
                    VarStatus::AtUpper
                }
            }
            (true, false) => VarStatus::AtLower,
            (false, true) => VarStatus::AtUpper,
            (false, false) => VarStatus::Free,
        }
    }

    /// `B^-1 a_j` into `out`.
    fn ftran_into(&self, j: usize, out: &mut Vec<f64>) {
        let m = self.m;
        out.clear();
        out.resize(m, 0.0);
        if j < self.n {
            for &(i, a) in &self.cols[j] {
                for (p, o) in out.iter_mut().enumerate() {
                    *o += a * self.binv[p * m + i];
                }
            }
        } else {
            let i = j - self.n;
            for (p, o) in out.iter_mut().enumerate() {
                *o = -self.binv[p * m + i];
            }
        }
    }

    /// Row `pos` of `B^-1 [A, -I]` into `out` (entries of basic variables are meaningless).
    fn tableau_row_into(&self, pos: usize, out: &mut Vec<f64>) {
        let m = self.m;
        out.clear();
        out.resize(self.n + m, 0.0);
        let rho = &self.binv[pos * m..(pos + 1) * m];
        for (i, &r) in rho.iter().enumerate() {
            if r != 0.0 {
                for &(j, a) in &self.rows[i] {
                    out[j] += r * a;
                }
                out[self.n + i] = -r;
            }
        }
    }

    /// Product-form update of the inverse for a pivot at `pos` with entering column `alpha`.
    fn pivot_inverse(&mut self, pos: usize, alpha: &[f64]) {
        let m = self.m;
        let inv_piv = 1.0 / alpha[pos];
        let mut pivot_row: Vec<(usize, f64)> = Vec::new();
        for k in 0..m {
            let v = self.binv[pos * m + k];
            if v != 0.0 {
                let v = v * inv_piv;
                self.binv[pos * m + k] = v;
                pivot_row.push((k, v));
            }
        }
        for (p, &a) in alpha.iter().enumerate() {
            if p == pos || a == 0.0 {
                continue;
            }
            let row = &mut self.binv[p * m..(p + 1) * m];
            for &(k, v) in &pivot_row {
                row[k] -= a * v;
            }
        }
    }

    fn compute_primal(&mut self) {
        self.primal_stale = false;
        let (n, m) = (self.n, self.m);
        let mut rhs = vec![0.0; m];
        for j in 0..n + m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            if j < n {
                for &(i, a) in &self.cols[j] {
                    rhs[i] -= a * v;
                }
            } else {
                rhs[j - n] += v;
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(b, r)| b * r).sum();
            self.x[self.head[p]] = v;
        }
    }

    /// Simplex multipliers for the given costs of the basic positions.
    fn multipliers(&self, basic_cost: impl Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for p in 0..m {
            let c = basic_cost(p);
            if c != 0.0 {
                for (pi_i, &b) in pi.iter_mut().zip(&self.binv[p * m..(p + 1) * m]) {
                    *pi_i += c * b;
                }
            }
        }
        pi
    }

    /// Reduced costs `c_j - pi^T a_j` for the cost vector `cost` (structural part only).
    fn reduced_costs_into(&self, pi: &[f64], structural_cost: impl Fn(usize) -> f64, out: &mut Vec<f64>) {
        let n = self.n;
        out.clear();
        out.resize(n + self.m, 0.0);
        for j in 0..n {
            if self.status[j] != VarStatus::Basic {
                out[j] = structural_cost(j) - self.cols[j].iter().map(|&(i, a)| pi[i] * a).sum::<f64>();
            }
        }
        for i in 0..self.m {
            if self.status[n + i] != VarStatus::Basic {
                out[n + i] = pi[i];
            }
        }
    }

    fn compute_duals(&mut self) {
        let pi = self.multipliers(|p| self.cost[self.head[p]]);
        let mut d = std::mem::take(&mut self.d);
        self.reduced_costs_into(&pi, |j| self.cost[j], &mut d);
        self.d = d;
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let tol = self.params.primal_tol;
        let v = self.x[j];
        if v < self.lower[j] - tol {
            v - self.lower[j]
        } else if v > self.upper[j] + tol {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        self.head.iter().all(|&j| self.infeasibility(j) == 0.0)
    }

    fn dual_infeasible(&self, j: usize) -> bool {
        let tol = self.params.dual_tol;
        match self.status[j] {
            VarStatus::Basic => false,
            _ if self.lower[j] == self.upper[j] => false,
            VarStatus::AtLower => self.d[j] < -tol,
            VarStatus::AtUpper => self.d[j] > tol,
            VarStatus::Free => self.d[j].abs() > tol,
        }
    }

    /// Move boxed nonbasic variables with the wrong reduced-cost sign to the
    /// opposite bound. Returns whether the basis is then dual feasible.
    fn make_dual_feasible_by_flips(&mut self) -> bool {
        let mut flipped = false;
        let mut feasible = true;
        for j in 0..self.n + self.m {
            if !self.dual_infeasible(j) {
                continue;
            }
            let boxed = self.lower[j].is_finite() && self.upper[j].is_finite();
            match self.status[j] {
                VarStatus::AtLower if boxed => {
                    self.status[j] = VarStatus::AtUpper;
                    self.x[j] = self.upper[j];
                    flipped = true;
                }
                VarStatus::AtUpper if boxed => {
                    self.status[j] = VarStatus::AtLower;
                    self.x[j] = self.lower[j];
                    flipped = true;
                }
                _ => feasible = false,
            }
        }
        if flipped {
            self.compute_primal();
        }
        feasible
    }

    fn maybe_refactor(&mut self, with_duals: bool) {
        if self.since_refactor >= self.params.refactor_interval {
            self.refactor();
            self.compute_primal();
            if with_duals {
                self.compute_duals();
            }
        }
    }

    /// Primal simplex: composite phase 1 until feasible, then phase 2.
    fn run_primal(&mut self) -> LpStatus {
        let n_total = self.n + self.m;
        let mut phase_one = !self.primal_feasible();
        let mut d1 = Vec::new();
        let mut stalled = 0usize;
        let mut alpha = std::mem::take(&mut self.col_work);
        let mut trow = std::mem::take(&mut self.row_work);
        let mut saved_bounds: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut rng = ChaCha8Rng::seed_from_u64(self.iterations);
        let result = loop {
            if self.out_of_budget() {
                break LpStatus::IterationLimit;
            }
            if stalled == self.params.degenerate_stall {
                saved_bounds.get_or_insert_with(|| (self.lower.clone(), self.upper.clone()));
                self.perturb_degenerate(&mut rng);
            }
            self.maybe_refactor(!phase_one);
            if phase_one && self.primal_feasible() {
                phase_one = false;
                self.compute_duals();
            }
            let bland = stalled > self.params.degenerate_stall;
            if phase_one {
                let pi = self.multipliers(|p| {
                    let inf = self.infeasibility(self.head[p]);
                    if inf < 0.0 {
                        -1.0
                    } else if inf > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                });
                self.reduced_costs_into(&pi, |_| 0.0, &mut d1);
            }
            let dvec = if phase_one { &d1 } else { &self.d };
            let tol = self.params.dual_tol;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..n_total {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let dj = dvec[j];
                let dir = match st {
                    VarStatus::AtLower if dj < -tol => 1.0,
                    VarStatus::AtUpper if dj > tol => -1.0,
                    VarStatus::Free if dj.abs() > tol => -dj.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if entering.is_none_or(|(q, _)| dj.abs() > dvec[q].abs()) {
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                break if phase_one { LpStatus::Infeasible } else { LpStatus::Optimal };
            };
            self.ftran_into(q, &mut alpha);
            let Some((step, theta)) = self.primal_ratio_test(q, dir, &alpha, phase_one, bland) else {
                break LpStatus::Unbounded;
            };
            self.iterations += 1;
            stalled = if theta <= 1e-12 { stalled + 1 } else { 0 };
            self.x[q] += dir * theta;
            if theta != 0.0 {
                for (p, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        self.x[self.head[p]] -= dir * theta * a;
                    }
                }
            }
            match step {
                PrimalStep::Flip => {
                    let st = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.status[q] = st;
                    self.x[q] = self.nonbasic_value(q, st);
                }
                PrimalStep::Pivot { pos, to_upper } => {
                    let leaving = self.head[pos];
                    if !phase_one {
                        self.tableau_row_into(pos, &mut trow);
                        let theta_d = self.d[q] / alpha[pos];
                        for j in 0..n_total {
                            if self.status[j] != VarStatus::Basic && trow[j] != 0.0 {
                                self.d[j] -= theta_d * trow[j];
                            }
                        }
                        self.d[leaving] = -theta_d;
                        self.d[q] = 0.0;
                    }
                    let st = if to_upper { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.status[leaving] = st;
                    self.x[leaving] = self.nonbasic_value(leaving, st);
                    self.status[q] = VarStatus::Basic;
                    self.pivot_inverse(pos, &alpha);
                    self.head[pos] = q;
                    self.since_refactor += 1;
                }
            }
        };
        self.col_work = alpha;
        self.row_work = trow;
        if let Some((lower, upper)) = saved_bounds {
            self.lower = lower;
            self.upper = upper;
            for j in 0..n_total {
                if self.status[j] != VarStatus::Basic {
                    self.x[j] = self.nonbasic_value(j, self.status[j]);
                }
            }
            self.compute_primal();
            if result == LpStatus::Optimal {
                self.compute_duals();
            }
        }
        result
    }

    /// Relax the bounds of basic variables sitting on them by a small random
    /// amount so that the following steps have positive length.
    fn perturb_degenerate(&mut self, rng: &mut ChaCha8Rng) {
        let ftol = self.params.primal_tol;
        for p in 0..self.m {
            let j = self.head[p];
            let v = self.x[j];
            if (v - self.lower[j]).abs() <= ftol {
                self.lower[j] -= rng.random_range(1e-7..1e-6) * (1.0 + self.lower[j].abs());
            }
            if (v - self.upper[j]).abs() <= ftol {
                self.upper[j] += rng.random_range(1e-7..1e-6) * (1.0 + self.upper[j].abs());
            }
        }
    }

    fn primal_ratio_test(
        &self,
        q: usize,
        dir: f64,
        alpha: &[f64],
        phase_one: bool,
        bland: bool,
    ) -> Option<(PrimalStep, f64)> {
        let ptol = self.params.pivot_tol;
        let ftol = self.params.primal_tol;
        let span = self.upper[q] - self.lower[q];
        // (limit, position, |alpha|, leaves at upper)
        let mut cands: Vec<(f64, usize, f64, bool)> = Vec::new();
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= ptol {
                continue;
            }
            let j = self.head[p];
            let rate = -dir * a;
            let (v, lo, hi) = (self.x[j], self.lower[j], self.upper[j]);
            let limit = if phase_one && v < lo - ftol {
                (rate > 0.0).then(|| ((lo - v) / rate, false))
            } else if phase_one && v > hi + ftol {
                (rate < 0.0).then(|| ((v - hi) / -rate, true))
            } else if rate < 0.0 {
                lo.is_finite().then(|| (((v - lo) / -rate).max(0.0), false))
            } else {
                hi.is_finite().then(|| (((hi - v) / rate).max(0.0), true))
            };
            if let Some((t, to_upper)) = limit {
                cands.push((t, p, a.abs(), to_upper));
            }
        }
        let t_min = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        if span.is_finite() && span <= t_min {
            return Some((PrimalStep::Flip, span));
        }
        if !t_min.is_finite() {
            return None;
        }
        let slack = 1e-12 * t_min.max(1.0);
        let chosen = cands
            .iter()
            .filter(|c| c.0 <= t_min + slack)
            .max_by(|a, b| {
                if bland {
                    self.head[b.1].cmp(&self.head[a.1])
                } else {
                    a.2.total_cmp(&b.2).then(b.1.cmp(&a.1))
                }
            })
            .copied()
            .expect("a candidate attains the minimum");
        Some((PrimalStep::Pivot { pos: chosen.1, to_upper: chosen.3 }, chosen.0))
    }

    /// Dual simplex from a dual feasible basis.
    fn run_dual(&mut self) -> LpStatus {
        let (n, m) = (self.n, self.m);
        let mut alpha = std::mem::take(&mut self.col_work);
        let mut trow = std::mem::take(&mut self.row_work);
        let mut stalled = 0usize;
        let result = loop {
            if self.out_of_budget() {
                break LpStatus::IterationLimit;
            }
            self.maybe_refactor(true);
            let bland = stalled > self.params.degenerate_stall;

            // leaving row: dual steepest edge with exact row norms of B^-1
            let mut leave: Option<(usize, f64)> = None;
            for p in 0..m {
                let inf = self.infeasibility(self.head[p]);
                if inf == 0.0 {
                    continue;
                }
                if bland {
                    if leave.is_none_or(|(lp, _)| self.head[p] < self.head[lp]) {
                        leave = Some((p, 0.0));
                    }
                    continue;
                }
                let norm: f64 = self.binv[p * m..(p + 1) * m].iter().map(|v| v * v).sum();
                let score = inf * inf / norm.max(1e-12);
                if leave.is_none_or(|(_, s)| score > s) {
                    leave = Some((p, score));
                }
            }
            let Some((r, _)) = leave else {
                break LpStatus::Optimal;
            };
            let leaving = self.head[r];
            let to_lower = self.x[leaving] < self.lower[leaving];
            let target = if to_lower { self.lower[leaving] } else { self.upper[leaving] };
            let delta = self.x[leaving] - target;

            self.tableau_row_into(r, &mut trow);
            let ptol = self.params.pivot_tol;
            let mut t_min = f64::INFINITY;
            for j in 0..n + m {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = if to_lower { -trow[j] } else { trow[j] };
                let ratio = match st {
                    VarStatus::AtLower if a > ptol => (self.d[j] / a).max(0.0),
                    VarStatus::AtUpper if a < -ptol => (self.d[j] / a).max(0.0),
                    VarStatus::Free if a.abs() > ptol => 0.0,
                    _ => continue,
                };
                t_min = t_min.min(ratio);
            }
            if !t_min.is_finite() {
                break LpStatus::Infeasible;
            }
            let slack = 1e-12 * t_min.max(1.0) + self.params.dual_tol * 1e-3;
            let mut entering: Option<usize> = None;
            for j in 0..n + m {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = if to_lower { -trow[j] } else { trow[j] };
                let ratio = match st {
                    VarStatus::AtLower if a > ptol => (self.d[j] / a).max(0.0),
                    VarStatus::AtUpper if a < -ptol => (self.d[j] / a).max(0.0),
                    VarStatus::Free if a.abs() > ptol => 0.0,
                    _ => continue,
                };
                if ratio > t_min + slack {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                if entering.is_none_or(|q| a.abs() > trow[q].abs()) {
                    entering = Some(j);
                }
            }
            let q = entering.expect("a candidate attains the minimum ratio");
            self.ftran_into(q, &mut alpha);
            let piv = alpha[r];
            if (piv - trow[q]).abs() > 1e-6 * (1.0 + piv.abs()) || piv.abs() <= ptol {
                // row and column computations disagree: rebuild and retry
                self.refactor();
                self.compute_primal();
                self.compute_duals();
                if !self.make_dual_feasible_by_flips() {
                    break LpStatus::Optimal; // caller re-checks and switches to primal
                }
                continue;
            }
            self.iterations += 1;
            let theta_d = self.d[q] / piv;
            stalled = if theta_d.abs() <= 1e-12 { stalled + 1 } else { 0 };
            if theta_d != 0.0 {
                for j in 0..n + m {
                    if self.status[j] != VarStatus::Basic && trow[j] != 0.0 {
                        self.d[j] -= theta_d * trow[j];
                    }
                }
            }
            self.d[leaving] = -theta_d;
            self.d[q] = 0.0;

            let theta_p = delta / piv;
            self.x[q] += theta_p;
            for (p, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.head[p]] -= theta_p * a;
                }
            }
            self.x[leaving] = target;
            self.status[leaving] = if to_lower { VarStatus::AtLower } else { VarStatus::AtUpper };
            self.status[q] = VarStatus::Basic;
            self.pivot_inverse(r, &alpha);
            self.head[r] = q;
            self.since_refactor += 1;
        };
        self.col_work = alpha;
        self.row_work = trow;
        result
    }

    /// Reoptimize from the current basis: dual simplex when the basis is dual
    /// feasible, primal simplex otherwise.
    pub fn solve(&mut self) -> LpSolution {
        self.ensure_factored();
        if self.primal_stale {
            self.compute_primal();
        }
        let mut status = LpStatus::Optimal;
        for _ in 0..8 {
            let dual_ok = self.make_dual_feasible_by_flips();
            let primal_ok = self.primal_feasible();
            if dual_ok && primal_ok {
                status = LpStatus::Optimal;
                break;
            }
            status = if dual_ok { self.run_dual() } else { self.run_primal() };
            if status == LpStatus::IterationLimit {
                break;
            }
            self.compute_primal();
            if self.primal_residual() > DRIFT_TOL {
                self.refactor();
                self.compute_primal();
            }
            self.compute_duals();
            if matches!(status, LpStatus::Infeasible | LpStatus::Unbounded) {
                break;
            }
        }
        self.solution(status)
    }

    /// Solve from the slack basis with the primal two-phase method.
    pub fn solve_cold(&mut self) -> LpSolution {
        self.set_slack_basis();
        let status = self.run_primal();
        if status != LpStatus::Optimal {
            return self.solution(status);
        }
        self.refactor();
        self.compute_primal();
        self.compute_duals();
        self.solve()
    }

    fn solution(&mut self, status: LpStatus) -> LpSolution {
        let (n, m) = (self.n, self.m);
        let pi = self.multipliers(|p| self.cost[self.head[p]]);
        let mut d = Vec::new();
        self.reduced_costs_into(&pi, |j| self.cost[j], &mut d);
        let primal = self.x[..n].to_vec();
        let objective = primal.iter().zip(&self.cost).map(|(x, c)| x * c).sum();
        LpSolution {
            status,
            primal,
            row_activity: self.x[n..n + m].to_vec(),
            dual: pi,
            reduced_costs: d[..n].to_vec(),
            objective,
            basis: self.basis(),
            iterations: self.iterations,
        }
    }

    /// Max-norm residual of `A x - s` at the current point.
    pub fn primal_residual(&self) -> f64 {
        let n = self.n;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let act: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum();
                (act - self.x[n + i]).abs()
            })
            .fold(0.0, f64::max)
    }
}
