use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use super::maxflow::{max_flow, FlowGraph};
use crate::model::{Row, Sense, VariableMap};

/// Connectivity inequality `x^k(out(S)) >= y_anchor^k` for a target set `S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cut {
    pub vehicle: usize,
    /// Sorted target ids; never contains the depot.
    pub set: Vec<usize>,
    pub anchor: usize,
}

impl Cut {
    pub fn new(vehicle: usize, mut set: Vec<usize>, anchor: usize) -> Self {
        set.sort_unstable();
        set.dedup();
        debug_assert!(set.binary_search(&anchor).is_ok(), "anchor outside the set");
        Self { vehicle, set, anchor }
    }

    pub fn row(&self, map: &VariableMap) -> Row {
        let inside = self.membership(map);
        let mut coefs = Vec::with_capacity(self.set.len() * (map.num_local_vertices() - self.set.len()) + 1);
        for &u in &self.set {
            for v in (0..map.num_local_vertices()).filter(|&v| !inside[v]) {
                coefs.push((map.x(self.vehicle, u, v), 1.0));
            }
        }
        coefs.push((map.y(self.anchor, self.vehicle), -1.0));
        let name = format!("sec_{}_{}_{}", self.vehicle, self.anchor, self.set.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("."));
        Row::new(name, coefs, Sense::Ge, 0.0)
    }

    /// `y_anchor - x(out(S))` at `point`; positive when the point violates the cut.
    pub fn violation(&self, point: &[f64], map: &VariableMap) -> f64 {
        let inside = self.membership(map);
        let mut out = 0.0;
        for &u in &self.set {
            for v in (0..map.num_local_vertices()).filter(|&v| !inside[v]) {
                out += point[map.x(self.vehicle, u, v)];
            }
        }
        point[map.y(self.anchor, self.vehicle)] - out
    }

    fn membership(&self, map: &VariableMap) -> Vec<bool> {
        let mut inside = vec![false; map.num_local_vertices()];
        for &i in &self.set {
            inside[i] = true;
        }
        inside
    }
}

/// How many cuts to emit for a violated set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnchorPolicy {
    /// One cut anchored at the largest `y` in the set (lowest id on ties).
    Strongest,
    /// One cut per violated anchor in the set.
    All,
}

/// Positive part of a vehicle's relaxation point. Vertices are local ids:
/// targets keep their ids, the depot is `map.depot()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportGraph {
    pub vehicle: usize,
    pub depot: usize,
    /// Sorted; always contains the depot.
    pub vertices: Vec<usize>,
    pub arcs: Vec<(usize, usize, f64)>,
    /// `y_i^k` for every target (zero outside the support).
    pub y: Vec<f64>,
}

/// Values at or below this are treated as absent from the support.
const SUPPORT_EPS: f64 = 1e-9;

pub fn build_support_graph(point: &[f64], map: &VariableMap, vehicle: usize) -> SupportGraph {
    let nt = map.num_targets();
    let depot = map.depot();
    let y: Vec<f64> = (0..nt).map(|i| point[map.y(i, vehicle)].clamp(0.0, 1.0)).collect();
    let mut vertices: Vec<usize> = (0..nt).filter(|&i| y[i] > SUPPORT_EPS).collect();
    vertices.push(depot);
    let mut arcs = Vec::new();
    for from in 0..=nt {
        for to in (0..=nt).filter(|&t| t != from) {
            let v = point[map.x(vehicle, from, to)];
            if v > SUPPORT_EPS {
                arcs.push((from, to, v.min(1.0)));
            }
        }
    }
    SupportGraph { vehicle, depot, vertices, arcs, y }
}

impl SupportGraph {
    fn anchors(&self, set: &[usize], policy: AnchorPolicy, capacity: f64, tol: f64) -> Vec<usize> {
        match policy {
            AnchorPolicy::Strongest => {
                let best = set.iter().copied().fold(None, |best: Option<usize>, i| match best {
                    Some(b) if self.y[b] >= self.y[i] => Some(b),
                    _ => Some(i),
                });
                best.filter(|&a| self.y[a] - capacity > tol).into_iter().collect()
            }
            AnchorPolicy::All => set.iter().copied().filter(|&i| self.y[i] - capacity > tol).collect(),
        }
    }

    fn out_capacity(&self, inside: &[bool]) -> f64 {
        self.arcs.iter().filter(|&&(u, v, _)| inside[u] && !inside[v]).map(|a| a.2).sum()
    }
}

/// Strongly connected components of the support graph that miss the depot.
/// At an integer point each such component is a subtour; it yields cuts whose
/// left side is zero.
pub fn separate_integer(graph: &SupportGraph, policy: AnchorPolicy, tol: f64) -> Vec<Cut> {
    let n = graph.depot + 1;
    let mut g = DiGraph::<usize, ()>::with_capacity(graph.vertices.len(), graph.arcs.len());
    let mut node = vec![None; n];
    for &v in &graph.vertices {
        node[v] = Some(g.add_node(v));
    }
    for &(u, v, w) in &graph.arcs {
        if let (Some(a), Some(b)) = (node[u], node[v]) {
            if w > 0.5 {
                g.add_edge(a, b, ());
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|ix| g[ix]).collect();
            c.sort_unstable();
            c
        })
        .filter(|c| !c.contains(&graph.depot))
        .collect();
    comps.sort();
    let mut cuts = Vec::new();
    for comp in comps {
        let mut inside = vec![false; n];
        for &i in &comp {
            inside[i] = true;
        }
        let cap = graph.out_capacity(&inside);
        for a in graph.anchors(&comp, policy, cap, tol) {
            cuts.push(Cut::new(graph.vehicle, comp.clone(), a));
        }
    }
    cuts
}

/// Minimum depot-to-target cuts on the support graph with capacities `x`.
/// A target whose cut capacity is below its `y` by more than `tol` yields cuts
/// on the minimal sink side.
pub fn separate_fractional(graph: &SupportGraph, policy: AnchorPolicy, tol: f64) -> Vec<Cut> {
    let n = graph.depot + 1;
    let mut fg = FlowGraph::new(n);
    for &(u, v, w) in &graph.arcs {
        fg.add_arc(u, v, w);
    }
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut cuts = Vec::new();
    for &t in graph.vertices.iter().filter(|&&v| v != graph.depot) {
        if graph.y[t] <= tol {
            continue;
        }
        if seen.iter().any(|s| s.binary_search(&t).is_ok()) {
            continue;
        }
        let (value, sink) = max_flow(&fg, graph.depot, t);
        if value >= graph.y[t] - tol {
            continue;
        }
        let mut inside = vec![false; n];
        for &i in &sink {
            inside[i] = true;
        }
        let cap = graph.out_capacity(&inside);
        for a in graph.anchors(&sink, policy, cap, tol) {
            cuts.push(Cut::new(graph.vehicle, sink.clone(), a));
        }
        seen.push(sink);
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nt: usize, arcs: &[(usize, usize, f64)], y: &[(usize, f64)]) -> SupportGraph {
        let mut yv = vec![0.0; nt];
        for &(i, v) in y {
            yv[i] = v;
        }
        let mut vertices: Vec<usize> = (0..nt).filter(|&i| yv[i] > 0.0).collect();
        vertices.push(nt);
        SupportGraph { vehicle: 0, depot: nt, vertices, arcs: arcs.to_vec(), y: yv }
    }

    #[test]
    fn textbook_subtour() {
        // depot 3, a=0, b=1, c=2
        let g = graph(3, &[(3, 0, 1.0), (0, 3, 1.0), (1, 2, 1.0), (2, 1, 1.0)], &[(0, 1.0), (1, 1.0), (2, 1.0)]);
        let cuts = separate_integer(&g, AnchorPolicy::Strongest, 1e-6);
        assert_eq!(cuts, vec![Cut::new(0, vec![1, 2], 1)]);
        assert_eq!(separate_integer(&g, AnchorPolicy::All, 1e-6).len(), 2);
    }

    #[test]
    fn single_tour_is_clean() {
        let g = graph(2, &[(2, 0, 1.0), (0, 1, 1.0), (1, 2, 1.0)], &[(0, 1.0), (1, 1.0)]);
        assert!(separate_integer(&g, AnchorPolicy::Strongest, 1e-6).is_empty());
        assert!(separate_fractional(&g, AnchorPolicy::Strongest, 1e-4).is_empty());
    }

    #[test]
    fn fractional_example_from_hand_enumeration() {
        // d=3, a=0, b=1, c=2: d->a 0.5, a->d 0.5, a<->b 0.5, b<->c 1.0
        let arcs = [(3, 0, 0.5), (0, 3, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 2, 1.0), (2, 1, 1.0)];
        let g = graph(3, &arcs, &[(0, 1.0), (1, 1.0), (2, 1.0)]);
        let cuts = separate_fractional(&g, AnchorPolicy::Strongest, 1e-4);
        assert!(!cuts.is_empty());
        assert!(cuts.iter().any(|c| c.set.contains(&2)));
    }
}
