/// Dense capacitated digraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowGraph {
    n: usize,
    cap: Vec<f64>,
}

impl FlowGraph {
    pub fn new(n: usize) -> Self {
        Self { n, cap: vec![0.0; n * n] }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    /// Add capacity to arc `(u, v)`; parallel arcs accumulate.
    pub fn add_arc(&mut self, u: usize, v: usize, capacity: f64) {
        assert!(capacity >= 0.0, "negative capacity on ({u}, {v})");
        if u != v {
            self.cap[u * self.n + v] += capacity;
        }
    }

    pub fn capacity(&self, u: usize, v: usize) -> f64 {
        self.cap[u * self.n + v]
    }

    /// Total capacity of arcs leaving the complement of `sink_side` into it.
    pub fn cut_capacity(&self, sink_side: &[bool]) -> f64 {
        let mut total = 0.0;
        for u in (0..self.n).filter(|&u| !sink_side[u]) {
            for v in (0..self.n).filter(|&v| sink_side[v]) {
                total += self.capacity(u, v);
            }
        }
        total
    }
}

const EPS: f64 = 1e-12;

/// Maximum `s`-`t` flow value and the minimal sink side of a minimum cut
/// (the vertices that can still reach `t` in the residual graph), sorted.
///
/// Highest-label push-relabel; only the preflow phase is needed since the
/// cut is read off the residual graph.
pub fn max_flow(graph: &FlowGraph, s: usize, t: usize) -> (f64, Vec<usize>) {
    let n = graph.n;
    assert!(s < n && t < n && s != t, "source and sink must be distinct vertices");
    let mut res = graph.cap.clone();
    let mut excess = vec![0.0; n];
    let mut height = vec![0usize; n];
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut active = vec![false; n];
    height[s] = n;

    for v in 0..n {
        let c = res[s * n + v];
        if c > 0.0 {
            res[s * n + v] = 0.0;
            res[v * n + s] += c;
            excess[v] += c;
            excess[s] -= c;
            if v != t && !active[v] {
                active[v] = true;
                buckets[height[v]].push(v);
            }
        }
    }

    while let Some(h) = (0..n).rev().find(|&h| !buckets[h].is_empty()) {
        let u = buckets[h].pop().expect("bucket is non-empty");
        active[u] = false;
        while excess[u] > EPS {
            let mut pushed = false;
            for v in 0..n {
                let r = res[u * n + v];
                if r > EPS && height[u] == height[v] + 1 {
                    let delta = excess[u].min(r);
                    res[u * n + v] -= delta;
                    res[v * n + u] += delta;
                    excess[u] -= delta;
                    excess[v] += delta;
                    if v != s && v != t && !active[v] {
                        active[v] = true;
                        buckets[height[v]].push(v);
                    }
                    pushed = true;
                    if excess[u] <= EPS {
                        break;
                    }
                }
            }
            if excess[u] <= EPS {
                break;
            }
            if !pushed {
                // at height n a vertex can no longer reach t; its excess is irrelevant to the cut
                let lowest = (0..n).filter(|&v| res[u * n + v] > EPS).map(|v| height[v]).min();
                match lowest {
                    Some(h) if h + 1 < n => height[u] = h + 1,
                    _ => {
                        height[u] = n;
                        break;
                    }
                }
            }
        }
    }

    // minimal sink side: reverse search from t over residual arcs
    let mut sink = vec![false; n];
    sink[t] = true;
    let mut stack = vec![t];
    while let Some(v) = stack.pop() {
        for u in 0..n {
            if !sink[u] && res[u * n + v] > EPS {
                sink[u] = true;
                stack.push(u);
            }
        }
    }
    debug_assert!(!sink[s]);
    (excess[t], (0..n).filter(|&v| sink[v]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc() {
        let mut g = FlowGraph::new(2);
        g.add_arc(0, 1, 3.0);
        assert_eq!(max_flow(&g, 0, 1), (3.0, vec![1]));
    }

    #[test]
    fn two_parallel_paths() {
        // s -> a -> t with (1, 2), s -> b -> t with (2, 1)
        let mut g = FlowGraph::new(4);
        g.add_arc(0, 1, 1.0);
        g.add_arc(1, 3, 2.0);
        g.add_arc(0, 2, 2.0);
        g.add_arc(2, 3, 1.0);
        assert_eq!(max_flow(&g, 0, 3).0, 2.0);
    }

    #[test]
    fn disconnected_sink() {
        let mut g = FlowGraph::new(3);
        g.add_arc(0, 1, 5.0);
        assert_eq!(max_flow(&g, 0, 2), (0.0, vec![2]));
    }

    #[test]
    fn flow_returns_through_bottleneck() {
        let mut g = FlowGraph::new(4);
        g.add_arc(0, 1, 10.0);
        g.add_arc(1, 2, 1.0);
        g.add_arc(2, 3, 10.0);
        g.add_arc(1, 0, 10.0);
        let (v, sink) = max_flow(&g, 0, 3);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(sink, vec![2, 3]);
    }
}
