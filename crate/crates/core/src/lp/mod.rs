//! Linear-programming relaxations.

mod simplex;

pub use simplex::Simplex;

use std::time::Instant;

use crate::model::linear::{LinearModel, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

/// Status of every structural column followed by one logical per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub num_columns: usize,
    pub status: Vec<VarStatus>,
}

impl Basis {
    pub fn basic_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.status[..self.num_columns]
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == VarStatus::Basic)
            .map(|(j, _)| j)
    }
}

#[derive(Debug, Clone)]
pub struct SimplexParams {
    pub max_iterations: u64,
    pub refactor_interval: usize,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_stall: usize,
}

impl Default for SimplexParams {
    fn default() -> Self {
        Self {
            max_iterations: 1_000_000,
            refactor_interval: 100,
            primal_tol: 1e-9,
            dual_tol: 1e-9,
            pivot_tol: 1e-9,
            degenerate_stall: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub row_activity: Vec<f64>,
    /// Row multipliers.
    pub dual: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub basis: Basis,
    /// Cumulative pivot count of the solver state.
    pub iterations: u64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// A reusable LP relaxation of a model: integrality is ignored.
pub struct LpState {
    simplex: Simplex,
}

impl LpState {
    pub fn new(model: &LinearModel) -> Self {
        Self::with_params(model, SimplexParams::default())
    }

    pub fn with_params(model: &LinearModel, params: SimplexParams) -> Self {
        let cost = model.columns.iter().map(|c| c.obj).collect();
        let lower = model.columns.iter().map(|c| c.lower).collect();
        let upper = model.columns.iter().map(|c| c.upper).collect();
        let mut simplex = Simplex::new(cost, lower, upper, params);
        simplex.add_rows(model.rows.iter().map(|r| {
            let (lo, hi) = r.sense.activity_bounds(r.rhs);
            (r.coefs.as_slice(), lo, hi)
        }));
        Self { simplex }
    }

    /// Solve from `warm` when given (dual reoptimization), else cold with the two-phase primal method.
    pub fn solve(&mut self, warm: Option<&Basis>) -> LpSolution {
        match warm {
            Some(b) => {
                self.simplex.set_basis(b);
                self.simplex.solve()
            }
            None => self.simplex.solve_cold(),
        }
    }

    /// Reoptimize from the current basis.
    pub fn resolve(&mut self) -> LpSolution {
        self.simplex.solve()
    }

    pub fn add_rows_and_reoptimize(&mut self, rows: &[Row]) -> LpSolution {
        self.add_rows(rows);
        self.simplex.solve()
    }

    pub fn add_rows(&mut self, rows: &[Row]) {
        self.simplex.add_rows(rows.iter().map(|r| {
            let (lo, hi) = r.sense.activity_bounds(r.rhs);
            (r.coefs.as_slice(), lo, hi)
        }));
    }

    pub fn set_column_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.simplex.set_column_bounds(j, lower, upper);
    }

    pub fn column_bounds(&self, j: usize) -> (f64, f64) {
        self.simplex.column_bounds(j)
    }

    pub fn basis(&self) -> Basis {
        self.simplex.basis()
    }

    pub fn num_rows(&self) -> usize {
        self.simplex.num_rows()
    }

    pub fn iterations(&self) -> u64 {
        self.simplex.iterations()
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.simplex.set_deadline(deadline);
    }
}

/// Solve the continuous relaxation of `model`.
pub fn solve_lp(model: &LinearModel, warm: Option<&Basis>) -> LpSolution {
    LpState::new(model).solve(warm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linear::{Column, ModelKind, Sense};

    fn model(cols: &[(f64, f64, f64)], rows: &[(&[(usize, f64)], Sense, f64)]) -> LinearModel {
        let mut m = LinearModel::new(ModelKind::Generic, "t");
        for (j, &(c, lo, hi)) in cols.iter().enumerate() {
            m.add_column(Column::continuous(format!("c{j}"), c, lo, hi));
        }
        for (i, (coefs, sense, rhs)) in rows.iter().enumerate() {
            m.add_row(Row::new(format!("r{i}"), coefs.to_vec(), *sense, *rhs));
        }
        m
    }

    #[test]
    fn single_bounded_variable() {
        let m = model(&[(-1.0, 0.0, 10.0)], &[(&[(0, 1.0)], Sense::Le, 3.0)]);
        let s = solve_lp(&m, None);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 3.0).abs() < 1e-12);
        assert!((s.dual[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_one_detects_infeasibility() {
        let m = model(
            &[(1.0, 0.0, 1.0), (1.0, 0.0, 1.0)],
            &[(&[(0, 1.0), (1, 1.0)], Sense::Ge, 3.0)],
        );
        assert_eq!(solve_lp(&m, None).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let m = model(
            &[(-1.0, 0.0, f64::INFINITY), (0.0, 0.0, 1.0)],
            &[(&[(0, 1.0), (1, -1.0)], Sense::Ge, 0.0)],
        );
        assert_eq!(solve_lp(&m, None).status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variable_and_equality() {
        // min x0 + 2 x1, x0 - x1 = -4, x1 in [0, 3], x0 free
        let m = model(
            &[(1.0, f64::NEG_INFINITY, f64::INFINITY), (2.0, 0.0, 3.0)],
            &[(&[(0, 1.0), (1, -1.0)], Sense::Eq, -4.0)],
        );
        let s = solve_lp(&m, None);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 4.0).abs() < 1e-12, "{}", s.objective);
    }

    #[test]
    fn warm_start_after_violated_row() {
        let m = model(
            &[(-1.0, 0.0, 4.0), (-1.0, 0.0, 4.0)],
            &[(&[(0, 1.0), (1, 2.0)], Sense::Le, 6.0)],
        );
        let mut st = LpState::new(&m);
        let first = st.solve(None);
        assert!((first.objective + 5.0).abs() < 1e-12);
        let cut = Row::new("cut", vec![(0, 1.0), (1, 1.0)], Sense::Le, 4.5);
        let after = st.add_rows_and_reoptimize(&[cut.clone()]);
        assert_eq!(after.status, LpStatus::Optimal);
        assert!((after.objective + 4.5).abs() < 1e-12);
        let mut ext = m.clone();
        ext.add_row(cut);
        assert!((solve_lp(&ext, None).objective - after.objective).abs() < 1e-12);
    }

    #[test]
    fn bound_change_and_basis_reuse() {
        let m = model(
            &[(-2.0, 0.0, 1.0), (-3.0, 0.0, 1.0), (-1.0, 0.0, 1.0)],
            &[(&[(0, 1.0), (1, 1.0), (2, 1.0)], Sense::Le, 1.5)],
        );
        let mut st = LpState::new(&m);
        let root = st.solve(None);
        assert!((root.objective + 4.0).abs() < 1e-12);
        st.set_column_bounds(1, 0.0, 0.0);
        let child = st.solve(Some(&root.basis));
        assert!((child.objective + 2.5).abs() < 1e-12, "{}", child.objective);
    }
}
