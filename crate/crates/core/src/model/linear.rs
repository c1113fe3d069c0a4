use std::fmt;

use crate::dubins::CostMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    /// `(lower, upper)` bounds on the row activity.
    pub fn activity_bounds(self, rhs: f64) -> (f64, f64) {
        match self {
            Sense::Le => (f64::NEG_INFINITY, rhs),
            Sense::Ge => (rhs, f64::INFINITY),
            Sense::Eq => (rhs, rhs),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub obj: f64,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

impl Column {
    pub fn continuous(name: impl Into<String>, obj: f64, lower: f64, upper: f64) -> Self {
        Self { name: name.into(), obj, lower, upper, integer: false }
    }

    pub fn binary(name: impl Into<String>, obj: f64) -> Self {
        Self { name: name.into(), obj, lower: 0.0, upper: 1.0, integer: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn new(name: impl Into<String>, coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { name: name.into(), coefs, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Stochastic,
    ExpectedValue,
    Generic,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Stochastic => "stochastic",
            ModelKind::ExpectedValue => "evp",
            ModelKind::Generic => "generic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetadata {
    pub kind: ModelKind,
    pub instance_name: String,
    /// Per-vehicle arc costs over the vehicle's vertices (targets, then its depot).
    pub arc_costs: Vec<CostMatrix>,
}

/// Sparse mixed-integer linear program, minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub metadata: ModelMetadata,
}

impl LinearModel {
    pub fn new(kind: ModelKind, name: impl Into<String>) -> Self {
        Self {
            columns: Vec::new(),
            rows: Vec::new(),
            metadata: ModelMetadata { kind, instance_name: name.into(), arc_costs: Vec::new() },
        }
    }

    pub fn add_column(&mut self, column: Column) -> usize {
        self.columns.push(column);
        self.columns.len() - 1
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.obj * v).sum()
    }

    /// Structural consistency: valid column references and ordered bounds.
    pub fn check(&self) -> Result<(), String> {
        for (j, c) in self.columns.iter().enumerate() {
            if c.lower > c.upper || c.lower.is_nan() || c.upper.is_nan() {
                return Err(format!("column {j} ({}) has bounds [{}, {}]", c.name, c.lower, c.upper));
            }
            if c.integer && c.lower == 0.0 && c.upper > 1.0 {
                return Err(format!("binary column {j} ({}) has upper bound {}", c.name, c.upper));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(&(j, _)) = r.coefs.iter().find(|&&(j, _)| j >= self.columns.len()) {
                return Err(format!("row {i} ({}) references missing column {j}", r.name));
            }
        }
        Ok(())
    }
}
