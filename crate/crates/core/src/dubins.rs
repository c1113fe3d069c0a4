//! Shortest paths for a forward-only vehicle with a minimum turn radius.
//!
//! Every shortest path between two oriented configurations is one of six
//! words built from left arcs (`L`), right arcs (`R`) and straight segments
//! (`S`). [`word_candidate`] constructs one word in closed form,
//! [`shortest_path`] takes the best of the six.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Operands of `sqrt`/`acos` this close outside their domain are clamped.
const DOMAIN_SLACK: f64 = 1e-12;

/// Planar position plus heading. The heading is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: mod_tau(theta) }
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// Reduce an angle to `[0, 2π)`. A value that rounds up to `2π` maps to 0.
pub fn mod_tau(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PathWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl PathWord {
    /// Tie-break order used by [`shortest_path`].
    pub const ALL: [PathWord; 6] = [
        PathWord::Lsl,
        PathWord::Rsr,
        PathWord::Lsr,
        PathWord::Rsl,
        PathWord::Rlr,
        PathWord::Lrl,
    ];

    fn segments(self) -> [Segment; 3] {
        use Segment::*;
        match self {
            PathWord::Lsl => [Left, Straight, Left],
            PathWord::Rsr => [Right, Straight, Right],
            PathWord::Lsr => [Left, Straight, Right],
            PathWord::Rsl => [Right, Straight, Left],
            PathWord::Rlr => [Right, Left, Right],
            PathWord::Lrl => [Left, Right, Left],
        }
    }
}

impl fmt::Display for PathWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PathWord::Lsl => "LSL",
            PathWord::Rsr => "RSR",
            PathWord::Lsr => "LSR",
            PathWord::Rsl => "RSL",
            PathWord::Rlr => "RLR",
            PathWord::Lrl => "LRL",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Segment {
    Left,
    Right,
    Straight,
}

/// A path of one word. `segment_params` are normalized by the radius: arc
/// entries are turn angles in radians, a straight entry is its length
/// divided by `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPath {
    pub word: PathWord,
    pub segment_params: [f64; 3],
    pub radius: f64,
    pub length: f64,
}

impl DubinsPath {
    /// Physical length of each of the three segments.
    pub fn segment_lengths(&self) -> [f64; 3] {
        self.segment_params.map(|p| p * self.radius)
    }

    /// Configuration reached after travelling `s` along the path from `start`.
    pub fn pose_at(&self, start: &Pose, s: f64) -> Pose {
        let mut remaining = s.clamp(0.0, self.length);
        let mut pose = *start;
        for (seg, len) in self.word.segments().into_iter().zip(self.segment_lengths()) {
            let step = remaining.min(len);
            pose = advance(&pose, seg, step, self.radius);
            remaining -= step;
            if remaining <= 0.0 {
                break;
            }
        }
        pose
    }

    pub fn end_pose(&self, start: &Pose) -> Pose {
        self.pose_at(start, self.length)
    }
}

fn advance(p: &Pose, seg: Segment, len: f64, radius: f64) -> Pose {
    match seg {
        Segment::Straight => Pose::new(
            p.x + len * p.theta.cos(),
            p.y + len * p.theta.sin(),
            p.theta,
        ),
        Segment::Left => {
            let dtheta = len / radius;
            let (s0, c0) = p.theta.sin_cos();
            let (s1, c1) = (p.theta + dtheta).sin_cos();
            Pose::new(
                p.x + radius * (s1 - s0),
                p.y - radius * (c1 - c0),
                p.theta + dtheta,
            )
        }
        Segment::Right => {
            let dtheta = len / radius;
            let (s0, c0) = p.theta.sin_cos();
            let (s1, c1) = (p.theta - dtheta).sin_cos();
            Pose::new(
                p.x - radius * (s1 - s0),
                p.y + radius * (c1 - c0),
                p.theta - dtheta,
            )
        }
    }
}

fn guarded_sqrt(v: f64) -> Option<f64> {
    if v >= 0.0 {
        Some(v.sqrt())
    } else if v > -DOMAIN_SLACK {
        Some(0.0)
    } else {
        None
    }
}

fn guarded_acos(v: f64) -> Option<f64> {
    if v.abs() <= 1.0 {
        Some(v.acos())
    } else if v.abs() <= 1.0 + DOMAIN_SLACK {
        Some(v.clamp(-1.0, 1.0).acos())
    } else {
        None
    }
}

/// Heading of the common tangent of two equal circles. Coincident circles
/// have no defined tangent; any heading on the circle works, so keep `fallback`.
fn tangent_heading(y: f64, x: f64, fallback: f64) -> f64 {
    if y.abs() < DOMAIN_SLACK && x.abs() < DOMAIN_SLACK {
        fallback
    } else {
        y.atan2(x)
    }
}

/// Path of exactly the given word from `start` to `end`, if that word admits one.
pub fn word_candidate(word: PathWord, start: &Pose, end: &Pose, radius: f64) -> Option<DubinsPath> {
    assert!(radius > 0.0, "turn radius must be positive");
    let dx = end.x - start.x;
    let dy = end.y - start.y;
    let d = dx.hypot(dy) / radius;
    let phi = if d > 0.0 { mod_tau(dy.atan2(dx)) } else { 0.0 };
    let a = mod_tau(start.theta - phi);
    let b = mod_tau(end.theta - phi);
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let cab = (a - b).cos();

    let params = match word {
        PathWord::Lsl => {
            let p = guarded_sqrt(2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb))?;
            let tmp = tangent_heading(cb - ca, d + sa - sb, a);
            [mod_tau(tmp - a), p, mod_tau(b - tmp)]
        }
        PathWord::Rsr => {
            let p = guarded_sqrt(2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa))?;
            let tmp = tangent_heading(ca - cb, d - sa + sb, a);
            [mod_tau(a - tmp), p, mod_tau(tmp - b)]
        }
        PathWord::Lsr => {
            let p = guarded_sqrt(-2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb))?;
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            [mod_tau(tmp - a), p, mod_tau(tmp - b)]
        }
        PathWord::Rsl => {
            let p = guarded_sqrt(-2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb))?;
            let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            [mod_tau(a - tmp), p, mod_tau(b - tmp)]
        }
        PathWord::Rlr => {
            let c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
            let p = mod_tau(TAU - guarded_acos(c)?);
            let t = mod_tau(a - (ca - cb).atan2(d - sa + sb) + p / 2.0);
            [t, p, mod_tau(a - b - t + p)]
        }
        PathWord::Lrl => {
            let c = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
            let p = mod_tau(TAU - guarded_acos(c)?);
            let t = mod_tau(-a - (ca - cb).atan2(d + sa - sb) + p / 2.0);
            [t, p, mod_tau(b - a - t + p)]
        }
    };
    let length = radius * (params[0] + params[1] + params[2]);
    Some(DubinsPath { word, segment_params: params, radius, length })
}

/// Minimum-length path over all six words; ties resolve in [`PathWord::ALL`] order.
pub fn shortest_path(start: &Pose, end: &Pose, radius: f64) -> DubinsPath {
    PathWord::ALL
        .iter()
        .filter_map(|&w| word_candidate(w, start, end, radius))
        .fold(None, |best: Option<DubinsPath>, cand| match best {
            Some(b) if b.length <= cand.length => Some(b),
            _ => Some(cand),
        })
        .expect("a CSC word exists for every configuration pair")
}

/// Dense asymmetric matrix of shortest-path lengths. The diagonal holds
/// [`CostMatrix::NO_EDGE`].
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    size: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub const NO_EDGE: f64 = f64::INFINITY;

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }
}

pub fn cost_matrix(poses: &[Pose], radius: f64) -> CostMatrix {
    assert!(!poses.is_empty(), "cost matrix needs at least one pose");
    let size = poses.len();
    let mut data = vec![CostMatrix::NO_EDGE; size * size];
    for (i, a) in poses.iter().enumerate() {
        for (j, b) in poses.iter().enumerate() {
            if i != j {
                data[i * size + j] = shortest_path(a, b, radius).length;
            }
        }
    }
    CostMatrix { size, data }
}

/// Points along `path` spaced at most `step` apart, first at `start`, last at the end pose.
pub fn sample_path(path: &DubinsPath, start: &Pose, step: f64) -> Vec<(f64, f64)> {
    assert!(step > 0.0, "sampling step must be positive");
    if path.length <= 0.0 {
        return vec![(start.x, start.y)];
    }
    let intervals = (path.length / step).ceil().max(1.0) as usize;
    (0..=intervals)
        .map(|i| {
            let s = path.length * i as f64 / intervals as f64;
            let p = path.pose_at(start, s);
            (p.x, p.y)
        })
        .collect()
}

/// Length of the polyline through `points`.
pub fn polyline_length(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn lsl_straight_line() {
        let p = word_candidate(PathWord::Lsl, &Pose::new(0.0, 0.0, 0.0), &Pose::new(10.0, 0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(p.length, 10.0, epsilon = 1e-12);
        assert_relative_eq!(p.segment_params[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(p.segment_params[1], 10.0, epsilon = 1e-12);
        assert_relative_eq!(p.segment_params[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ccc_words_need_close_endpoints() {
        let s = Pose::new(0.0, 0.0, 0.0);
        let e = Pose::new(10.0, 0.0, 0.0);
        assert!(word_candidate(PathWord::Lrl, &s, &e, 1.0).is_none());
        assert!(word_candidate(PathWord::Rlr, &s, &e, 1.0).is_none());
    }

    #[test]
    fn identical_configurations_have_zero_length() {
        let p = Pose::new(3.0, -2.0, 1.0);
        assert_eq!(shortest_path(&p, &p, 1.0).length, 0.0);
    }

    #[test]
    fn aligned_poses_pick_lsl() {
        let p = shortest_path(&Pose::new(0.0, 0.0, 0.0), &Pose::new(100.0, 0.0, 0.0), 1.0);
        assert_eq!(p.word, PathWord::Lsl);
        assert_relative_eq!(p.length, 100.0, epsilon = 1e-12);
    }

    #[test]
    fn heading_is_normalized() {
        assert_relative_eq!(Pose::new(0.0, 0.0, -PI / 2.0).theta, 3.0 * PI / 2.0);
        assert_eq!(Pose::new(0.0, 0.0, TAU).theta, 0.0);
    }

    #[test]
    fn single_pose_matrix() {
        let m = cost_matrix(&[Pose::new(0.0, 0.0, 0.0)], 1.0);
        assert_eq!(m.size(), 1);
        assert_eq!(m.get(0, 0), CostMatrix::NO_EDGE);
    }

    #[test]
    fn zero_length_sample() {
        let p = Pose::new(1.0, 2.0, 0.5);
        let path = shortest_path(&p, &p, 1.0);
        assert_eq!(sample_path(&path, &p, 0.1), vec![(1.0, 2.0)]);
    }

    #[test]
    fn straight_sample_has_eleven_points() {
        let s = Pose::new(0.0, 0.0, 0.0);
        let path = shortest_path(&s, &Pose::new(10.0, 0.0, 0.0), 1.0);
        let pts = sample_path(&path, &s, 1.0);
        assert_eq!(pts.len(), 11);
        for (i, (x, y)) in pts.iter().enumerate() {
            assert_relative_eq!(*x, i as f64, epsilon = 1e-9);
            assert_relative_eq!(*y, 0.0, epsilon = 1e-9);
        }
    }
}
