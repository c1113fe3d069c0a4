use std::fmt::Write as _;

use super::linear::{Column, LinearModel, ModelKind, Row, Sense};
use crate::dubins::cost_matrix;
use crate::instance::Instance;

/// A decoded model column. Vertex indices are local to the vehicle: targets
/// keep their ids and the vehicle's depot is `num_targets`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X { vehicle: usize, from: usize, to: usize },
    Y { target: usize, vehicle: usize },
    Z { vehicle: usize, scenario: usize },
    H { vehicle: usize },
}

/// Column layout of a built model: all x blocks (vehicle-major), then y, z and h.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMap {
    num_targets: usize,
    num_vehicles: usize,
    z_per_vehicle: usize,
    y_start: usize,
    z_start: usize,
    h_start: usize,
}

impl VariableMap {
    fn new(num_targets: usize, num_vehicles: usize, z_per_vehicle: usize) -> Self {
        let arcs = (num_targets + 1) * num_targets;
        let y_start = arcs * num_vehicles;
        let z_start = y_start + num_targets * num_vehicles;
        let h_start = z_start + z_per_vehicle * num_vehicles;
        Self { num_targets, num_vehicles, z_per_vehicle, y_start, z_start, h_start }
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn num_vehicles(&self) -> usize {
        self.num_vehicles
    }

    /// Local index of every vehicle's depot.
    pub fn depot(&self) -> usize {
        self.num_targets
    }

    /// Vertices per vehicle: all targets plus the depot.
    pub fn num_local_vertices(&self) -> usize {
        self.num_targets + 1
    }

    /// Number of z columns per vehicle (scenarios, or 1 for the expected-value model).
    pub fn z_per_vehicle(&self) -> usize {
        self.z_per_vehicle
    }

    pub fn num_columns(&self) -> usize {
        self.h_start + self.num_vehicles
    }

    pub fn arcs_per_vehicle(&self) -> usize {
        (self.num_targets + 1) * self.num_targets
    }

    pub fn x(&self, vehicle: usize, from: usize, to: usize) -> usize {
        debug_assert!(from != to && from <= self.num_targets && to <= self.num_targets);
        let within = from * self.num_targets + if to < from { to } else { to - 1 };
        vehicle * self.arcs_per_vehicle() + within
    }

    pub fn y(&self, target: usize, vehicle: usize) -> usize {
        self.y_start + target * self.num_vehicles + vehicle
    }

    pub fn z(&self, vehicle: usize, scenario: usize) -> usize {
        self.z_start + vehicle * self.z_per_vehicle + scenario
    }

    pub fn h(&self, vehicle: usize) -> usize {
        self.h_start + vehicle
    }

    pub fn x_range(&self, vehicle: usize) -> std::ops::Range<usize> {
        let a = self.arcs_per_vehicle();
        vehicle * a..(vehicle + 1) * a
    }

    pub fn y_range(&self) -> std::ops::Range<usize> {
        self.y_start..self.z_start
    }

    pub fn z_range(&self) -> std::ops::Range<usize> {
        self.z_start..self.h_start
    }

    pub fn decode(&self, col: usize) -> Option<Var> {
        if col < self.y_start {
            let a = self.arcs_per_vehicle();
            let (vehicle, within) = (col / a, col % a);
            let from = within / self.num_targets;
            let r = within % self.num_targets;
            let to = if r < from { r } else { r + 1 };
            Some(Var::X { vehicle, from, to })
        } else if col < self.z_start {
            let off = col - self.y_start;
            Some(Var::Y { target: off / self.num_vehicles, vehicle: off % self.num_vehicles })
        } else if col < self.h_start {
            let off = col - self.z_start;
            Some(Var::Z { vehicle: off / self.z_per_vehicle, scenario: off % self.z_per_vehicle })
        } else if col < self.num_columns() {
            Some(Var::H { vehicle: col - self.h_start })
        } else {
            None
        }
    }

    /// Conventional column name: `x_k_i_j`, `y_i_k`, `z_k_w`, `h_k`; the depot is written `d`.
    pub fn name(&self, col: usize) -> String {
        let v = |i: usize| if i == self.num_targets { "d".to_string() } else { i.to_string() };
        match self.decode(col) {
            Some(Var::X { vehicle, from, to }) => format!("x_{vehicle}_{}_{}", v(from), v(to)),
            Some(Var::Y { target, vehicle }) => format!("y_{target}_{vehicle}"),
            Some(Var::Z { vehicle, scenario }) => format!("z_{vehicle}_{scenario}"),
            Some(Var::H { vehicle }) => format!("h_{vehicle}"),
            None => format!("c{col}"),
        }
    }
}

/// Columns and the first-stage rows shared by both models.
fn first_stage(instance: &Instance, kind: ModelKind, map: &VariableMap, z_obj: impl Fn(usize, usize) -> f64) -> LinearModel {
    let nt = instance.num_targets();
    let nk = instance.num_vehicles();
    let mut model = LinearModel::new(kind, instance.name.clone());

    for k in 0..nk {
        let costs = cost_matrix(&instance.vehicle_poses(k), instance.vehicles[k].turn_radius);
        for from in 0..=nt {
            for to in (0..=nt).filter(|&t| t != from) {
                let col = model.add_column(Column::binary(map.name(map.x(k, from, to)), costs.get(from, to)));
                debug_assert_eq!(col, map.x(k, from, to));
            }
        }
        model.metadata.arc_costs.push(costs);
    }
    for i in 0..nt {
        let owner = instance.required_owner(i);
        for k in 0..nk {
            let mut c = Column::binary(map.name(map.y(i, k)), 0.0);
            match owner {
                Some(o) if o == k => c.lower = 1.0,
                Some(_) => c.upper = 0.0,
                None => {}
            }
            model.add_column(c);
        }
    }
    for k in 0..nk {
        for w in 0..map.z_per_vehicle() {
            model.add_column(Column::continuous(map.name(map.z(k, w)), z_obj(k, w), 0.0, f64::INFINITY));
        }
    }
    for k in 0..nk {
        model.add_column(Column::binary(map.name(map.h(k)), 0.0));
    }

    for k in 0..nk {
        for i in 0..nt {
            let mut out: Vec<(usize, f64)> = (0..=nt).filter(|&j| j != i).map(|j| (map.x(k, i, j), 1.0)).collect();
            out.push((map.y(i, k), -1.0));
            model.add_row(Row::new(format!("out_{i}_{k}"), out, Sense::Eq, 0.0));
            let mut inc: Vec<(usize, f64)> = (0..=nt).filter(|&j| j != i).map(|j| (map.x(k, j, i), 1.0)).collect();
            inc.push((map.y(i, k), -1.0));
            model.add_row(Row::new(format!("in_{i}_{k}"), inc, Sense::Eq, 0.0));
        }
    }
    for i in 0..nt {
        let coefs = (0..nk).map(|k| (map.y(i, k), 1.0)).collect();
        model.add_row(Row::new(format!("assign_{i}"), coefs, Sense::Eq, 1.0));
    }
    model
}

fn depot_rows(instance: &Instance, map: &VariableMap, model: &mut LinearModel) {
    let nt = instance.num_targets();
    let depot = map.depot();
    for k in 0..instance.num_vehicles() {
        let mut out: Vec<(usize, f64)> = (0..nt).map(|j| (map.x(k, depot, j), 1.0)).collect();
        out.push((map.h(k), -1.0));
        model.add_row(Row::new(format!("depot_out_{k}"), out, Sense::Eq, 0.0));
        let mut inc: Vec<(usize, f64)> = (0..nt).map(|j| (map.x(k, j, depot), 1.0)).collect();
        inc.push((map.h(k), -1.0));
        model.add_row(Row::new(format!("depot_in_{k}"), inc, Sense::Eq, 0.0));
    }
    for i in 0..nt {
        for k in 0..instance.num_vehicles() {
            let coefs = vec![(map.y(i, k), 1.0), (map.h(k), -1.0)];
            model.add_row(Row::new(format!("link_{i}_{k}"), coefs, Sense::Le, 0.0));
        }
    }
}

fn service_row(instance: &Instance, map: &VariableMap, k: usize, z_col: usize, tau: impl Fn(usize) -> f64) -> Vec<(usize, f64)> {
    let mut coefs: Vec<(usize, f64)> = (0..instance.num_targets())
        .map(|i| (map.y(i, k), instance.tau_bar[i][k] - tau(i)))
        .filter(|&(_, a)| a != 0.0)
        .collect();
    coefs.push((z_col, 1.0));
    coefs
}

/// The two-stage model with one excess-time column per vehicle and scenario.
/// Subtour elimination rows are left to the solver.
pub fn build_two_stage(instance: &Instance) -> (LinearModel, VariableMap) {
    let s = &instance.scenarios;
    let map = VariableMap::new(instance.num_targets(), instance.num_vehicles(), s.num_scenarios());
    let mut model = first_stage(instance, ModelKind::Stochastic, &map, |k, w| s.prob()[w] * instance.vehicles[k].gamma);
    for k in 0..instance.num_vehicles() {
        for w in 0..s.num_scenarios() {
            let coefs = service_row(instance, &map, k, map.z(k, w), |i| s.tau(i, k, w));
            model.add_row(Row::new(format!("service_{k}_{w}"), coefs, Sense::Ge, 0.0));
        }
    }
    depot_rows(instance, &map, &mut model);
    (model, map)
}

/// The expected-value model: service times replaced by their means, one excess column per vehicle.
pub fn build_evp(instance: &Instance) -> (LinearModel, VariableMap) {
    let s = &instance.scenarios;
    let map = VariableMap::new(instance.num_targets(), instance.num_vehicles(), 1);
    let mut model = first_stage(instance, ModelKind::ExpectedValue, &map, |k, _| instance.vehicles[k].gamma);
    for k in 0..instance.num_vehicles() {
        let coefs = service_row(instance, &map, k, map.z(k, 0), |i| s.expected_tau(i, k));
        model.add_row(Row::new(format!("service_{k}"), coefs, Sense::Ge, 0.0));
    }
    depot_rows(instance, &map, &mut model);
    (model, map)
}

fn mps_number(v: f64) -> String {
    format!("{v:?}")
}

/// Free-format MPS text. Integer columns are wrapped in `MARKER` lines.
pub fn to_mps(model: &LinearModel) -> String {
    let mut out = String::new();
    let name = if model.metadata.instance_name.is_empty() { "model" } else { &model.metadata.instance_name };
    let _ = writeln!(out, "NAME {name}");
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N obj");
    for r in &model.rows {
        let s = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {s} {}", r.name);
    }
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_columns()];
    for (i, r) in model.rows.iter().enumerate() {
        for &(j, a) in &r.coefs {
            by_col[j].push((i, a));
        }
    }
    let _ = writeln!(out, "COLUMNS");
    let mut in_int = false;
    let mut marker = 0;
    for (j, col) in model.columns.iter().enumerate() {
        if col.integer != in_int {
            let tag = if col.integer { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, " MARKER{marker} 'MARKER' '{tag}'");
            marker += 1;
            in_int = col.integer;
        }
        if col.obj != 0.0 || by_col[j].is_empty() {
            let _ = writeln!(out, " {} obj {}", col.name, mps_number(col.obj));
        }
        for &(i, a) in &by_col[j] {
            let _ = writeln!(out, " {} {} {}", col.name, model.rows[i].name, mps_number(a));
        }
    }
    if in_int {
        let _ = writeln!(out, " MARKER{marker} 'MARKER' 'INTEND'");
    }
    let _ = writeln!(out, "RHS");
    for r in model.rows.iter().filter(|r| r.rhs != 0.0) {
        let _ = writeln!(out, " rhs {} {}", r.name, mps_number(r.rhs));
    }
    let _ = writeln!(out, "BOUNDS");
    for col in &model.columns {
        let (lo, hi) = (col.lower, col.upper);
        if lo == hi {
            let _ = writeln!(out, " FX bnd {} {}", col.name, mps_number(lo));
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " FR bnd {}", col.name);
            }
            (false, true) => {
                let _ = writeln!(out, " MI bnd {}", col.name);
                let _ = writeln!(out, " UP bnd {} {}", col.name, mps_number(hi));
            }
            (true, fin_hi) => {
                if lo != 0.0 {
                    let _ = writeln!(out, " LO bnd {} {}", col.name, mps_number(lo));
                }
                if fin_hi {
                    let _ = writeln!(out, " UP bnd {} {}", col.name, mps_number(hi));
                }
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::test_support::line_instance;

    #[test]
    fn map_round_trips_every_column() {
        let map = VariableMap::new(4, 3, 5);
        for col in 0..map.num_columns() {
            let back = match map.decode(col).unwrap() {
                Var::X { vehicle, from, to } => map.x(vehicle, from, to),
                Var::Y { target, vehicle } => map.y(target, vehicle),
                Var::Z { vehicle, scenario } => map.z(vehicle, scenario),
                Var::H { vehicle } => map.h(vehicle),
            };
            assert_eq!(back, col);
        }
        assert_eq!(map.decode(map.num_columns()), None);
    }

    #[test]
    fn names_follow_convention() {
        let map = VariableMap::new(3, 2, 4);
        assert_eq!(map.name(map.x(1, 3, 0)), "x_1_d_0");
        assert_eq!(map.name(map.y(2, 1)), "y_2_1");
        assert_eq!(map.name(map.z(1, 3)), "z_1_3");
        assert_eq!(map.name(map.h(0)), "h_0");
    }

    #[test]
    fn built_model_is_consistent() {
        let inst = line_instance(3);
        let (m, map) = build_two_stage(&inst);
        m.check().unwrap();
        assert_eq!(m.num_columns(), map.num_columns());
        for (j, c) in m.columns.iter().enumerate() {
            assert_eq!(c.name, map.name(j));
        }
        let mps = to_mps(&m);
        assert!(mps.starts_with("NAME ") && mps.trim_end().ends_with("ENDATA"));
        assert!(mps.contains("'INTORG'"));
    }
}
