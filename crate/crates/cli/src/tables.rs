//! Markdown and CSV tables built from run records. Every function here is a
//! pure function of its input rows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use stochpath_core::VssReport;

use crate::record::{status_label, SolveRecord};

/// Per-instance solve statistics: computation time, nodes and cut counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: String,
    pub status: String,
    pub objective: f64,
    pub nodes: u64,
    pub cuts_added: usize,
    pub time_s: f64,
}

impl From<&SolveRecord> for RunRow {
    fn from(r: &SolveRecord) -> Self {
        Self {
            instance: r.instance.clone(),
            status: status_label(r.status),
            objective: r.objective,
            nodes: r.nodes,
            cuts_added: r.cuts_added,
            time_s: r.wall_time_s,
        }
    }
}

/// Stochastic versus expected-value comparison for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VssRow {
    pub instance: String,
    pub d_star: f64,
    pub s_star: f64,
    pub vss: f64,
    pub certified: bool,
    pub stochastic_time_s: f64,
    pub evp_time_s: f64,
    /// Extra time spent on the two-stage model over the expected-value model.
    pub extra_time_s: f64,
}

impl From<&VssReport> for VssRow {
    fn from(r: &VssReport) -> Self {
        Self {
            instance: r.instance.clone(),
            d_star: r.d_star,
            s_star: r.s_star,
            vss: r.vss,
            certified: r.certified,
            stochastic_time_s: r.s_time_s,
            evp_time_s: r.evp_time_s,
            extra_time_s: r.s_time_s - r.evp_time_s,
        }
    }
}

/// `12345.678` -> `12,345.68`.
pub fn thousands(v: f64) -> String {
    let s = format!("{v:.2}");
    let (sign, body) = match s.strip_prefix('-') {
        Some(b) if b != "0.00" => ("-", b),
        Some(b) => ("", b),
        None => ("", s.as_str()),
    };
    let (int, frac) = body.split_once('.').expect("two decimals");
    let mut out = String::from(sign);
    for (i, c) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    format!("{out}.{frac}")
}

pub fn runs_markdown(rows: &[RunRow]) -> String {
    let mut out = String::from("| Instance | Status | Objective | Nodes | Cuts | Time (s) |\n|---|---|---:|---:|---:|---:|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {:.2} |",
            r.instance,
            r.status,
            thousands(r.objective),
            r.nodes,
            r.cuts_added,
            r.time_s
        );
    }
    out
}

pub fn vss_markdown(rows: &[VssRow]) -> String {
    let mut out = String::from("| Instance | D* | S* | VSS |\n|---|---:|---:|---:|\n");
    for r in rows {
        let mark = if r.certified { "" } else { " (not certified)" };
        let _ = writeln!(out, "| {}{mark} | {} | {} | {} |", r.instance, thousands(r.d_star), thousands(r.s_star), thousands(r.vss));
    }
    out
}

fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

pub fn runs_csv(rows: &[RunRow]) -> String {
    to_csv(rows)
}

pub fn vss_csv(rows: &[VssRow]) -> String {
    to_csv(rows)
}

pub fn read_vss_csv(text: &str) -> Result<Vec<VssRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}
