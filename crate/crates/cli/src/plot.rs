//! SVG drawing of an instance and its tours.

use std::fmt::Write as _;

use stochpath_core::dubins::{polyline_length, sample_path, shortest_path, Pose};
use stochpath_core::Instance;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PlotError {
    #[error("solution has {found} tours but the instance has {expected} vehicles")]
    VehicleCount { expected: usize, found: usize },
    #[error("tour of vehicle {vehicle} visits target {target}, but the instance has {targets} targets")]
    UnknownTarget { vehicle: usize, target: usize, targets: usize },
}

/// Sampled tour of one vehicle, closed at its depot.
pub fn tour_polyline(instance: &Instance, vehicle: usize, tour: &[usize], step: f64) -> Vec<(f64, f64)> {
    if tour.is_empty() {
        return Vec::new();
    }
    let depot = instance.depot_pose(vehicle);
    let r = instance.vehicles[vehicle].turn_radius;
    let mut stops: Vec<Pose> = vec![depot];
    stops.extend(tour.iter().map(|&i| instance.targets[i]));
    stops.push(depot);
    let mut points = Vec::new();
    for w in stops.windows(2) {
        let mut seg = sample_path(&shortest_path(&w[0], &w[1], r), &w[0], step);
        if !points.is_empty() {
            seg.remove(0);
        }
        points.extend(seg);
    }
    points
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
}

impl Frame {
    fn new(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for (x, y) in points {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
        Self { min_x: lo.0, max_y: hi.1, scale: (SIZE - 2.0 * MARGIN) / span }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (MARGIN + (x - self.min_x) * self.scale, MARGIN + (self.max_y - y) * self.scale)
    }
}

/// The SVG document. `step` is the sampling distance along the curves in
/// instance units; the caption reports the sampled total length.
pub fn render_svg(instance: &Instance, tours: &[Vec<usize>], step: f64) -> Result<String, PlotError> {
    if tours.len() != instance.num_vehicles() {
        return Err(PlotError::VehicleCount { expected: instance.num_vehicles(), found: tours.len() });
    }
    for (vehicle, tour) in tours.iter().enumerate() {
        if let Some(&target) = tour.iter().find(|&&t| t >= instance.num_targets()) {
            return Err(PlotError::UnknownTarget { vehicle, target, targets: instance.num_targets() });
        }
    }
    let curves: Vec<Vec<(f64, f64)>> =
        tours.iter().enumerate().map(|(k, t)| tour_polyline(instance, k, t, step)).collect();
    let frame = Frame::new(
        instance
            .targets
            .iter()
            .chain(&instance.depots)
            .map(|p| (p.x, p.y))
            .chain(curves.iter().flatten().copied()),
    );
    let glyph = 12.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{h}" viewBox="0 0 {SIZE} {h}">"#,
        h = SIZE + 30.0
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let mut total = 0.0;
    for (k, curve) in curves.iter().enumerate() {
        if curve.is_empty() {
            continue;
        }
        total += polyline_length(curve);
        let pts: Vec<String> = curve.iter().map(|&p| {
            let (x, y) = frame.map(p);
            format!("{x:.2},{y:.2}")
        }).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="tour" data-vehicle="{k}" fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            PALETTE[k % PALETTE.len()],
            pts.join(" ")
        );
    }
    for (i, t) in instance.targets.iter().enumerate() {
        let (x, y) = frame.map((t.x, t.y));
        let (hx, hy) = (x + glyph * t.theta.cos(), y - glyph * t.theta.sin());
        let _ = writeln!(svg, r#"<circle class="target" cx="{x:.2}" cy="{y:.2}" r="4" fill="black"/>"#);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{hx:.2}" y2="{hy:.2}" stroke="black" stroke-width="1"/>"#);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="10">{i}</text>"#, x + 5.0, y - 5.0);
    }
    for (k, v) in instance.vehicles.iter().enumerate() {
        let d = instance.depots[v.depot];
        let (x, y) = frame.map((d.x, d.y));
        let (hx, hy) = (x + glyph * d.theta.cos(), y - glyph * d.theta.sin());
        let _ = writeln!(
            svg,
            r#"<rect class="depot" data-vehicle="{k}" x="{:.2}" y="{:.2}" width="10" height="10" fill="{}"/>"#,
            x - 5.0,
            y - 5.0,
            PALETTE[k % PALETTE.len()]
        );
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{hx:.2}" y2="{hy:.2}" stroke="black" stroke-width="1"/>"#);
    }
    let _ = writeln!(
        svg,
        r#"<text id="caption" x="{MARGIN}" y="{:.2}" font-size="14" data-length="{total:.6}">{}: path length {total:.1}</text>"#,
        SIZE + 15.0,
        instance.name
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
