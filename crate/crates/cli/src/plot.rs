//! Self-contained SVG emitters. Output bytes are a pure function of the
//! input (fixed float formatting, no timestamps), so plots can be diffed.

use anyhow::bail;
use fieldtrack_core::sim::{Histogram, TargetPower};
use fieldtrack_core::tracker::{Ellipsoid, Trajectory};
use nalgebra::DVector;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 40.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn from_bounds(xs: impl Iterator<Item = (f64, f64)>) -> Frame {
        let mut x0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y0 = f64::INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for (x, y) in xs {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !(x1 > x0) {
            x1 = x0 + 1.0;
        }
        if !(y1 > y0) {
            y1 = y0 + 1.0;
        }
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    /// SVG y grows downward.
    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

fn polyline(points: &[(f64, f64)], color: &str, width: f64) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

/// Trajectory polyline with confidence ellipses at selected states.
pub fn svg_trajectory(traj: &Trajectory, ellipses: &[Ellipsoid]) -> anyhow::Result<String> {
    if traj.states.is_empty() {
        bail!("cannot plot an empty trajectory");
    }
    if traj.dim() != 2 {
        bail!("SVG trajectory plots need d = 2");
    }
    let ellipse_pts: Vec<(f64, f64)> = ellipses
        .iter()
        .flat_map(|e| ellipse_ring(e))
        .collect();
    let frame = Frame::from_bounds(
        traj.states
            .iter()
            .map(|s| (s.x_hat[0], s.x_hat[1]))
            .chain(ellipse_pts.iter().copied()),
    );
    let mut svg = header();
    for e in ellipses {
        let ring: Vec<(f64, f64)> = ellipse_ring(e)
            .into_iter()
            .map(|(x, y)| (frame.px(x), frame.py(y)))
            .collect();
        svg.push_str(&polyline(&ring, "#4477aa", 1.0));
    }
    let path: Vec<(f64, f64)> = traj
        .states
        .iter()
        .map(|s| (frame.px(s.x_hat[0]), frame.py(s.x_hat[1])))
        .collect();
    svg.push_str(&polyline(&path, "#222222", 1.5));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn ellipse_ring(e: &Ellipsoid) -> Vec<(f64, f64)> {
    let segments = 64;
    let mut ring = Vec::with_capacity(segments + 1);
    for i in 0..=segments {
        let theta = std::f64::consts::TAU * i as f64 / segments as f64;
        let mut p = e.center.clone();
        // 2-D ring: major axis gets cos, minor gets sin.
        for (axis, (dir, len)) in e.axes.iter().enumerate() {
            let coeff = if axis == 0 { theta.cos() } else { theta.sin() };
            p += dir * (*len * coeff);
        }
        ring.push((p[0], p[1]));
    }
    ring
}

/// Histogram bars with an optional standard-normal density overlay.
pub fn svg_histogram(
    hist: &Histogram,
    total: usize,
    overlay_normal: bool,
) -> anyhow::Result<String> {
    if hist.counts.is_empty() || total == 0 {
        bail!("cannot plot an empty histogram");
    }
    let bins = hist.counts.len();
    let bin_w = (hist.hi - hist.lo) / bins as f64;
    let max_count = *hist.counts.iter().max().unwrap() as f64;
    if max_count == 0.0 {
        bail!("cannot plot an all-zero histogram");
    }
    let frame = Frame {
        x0: hist.lo,
        x1: hist.hi,
        y0: 0.0,
        y1: max_count,
    };
    let mut svg = header();
    for (i, &c) in hist.counts.iter().enumerate() {
        let x = hist.lo + i as f64 * bin_w;
        let px = frame.px(x);
        let pw = frame.px(x + bin_w) - px;
        let py = frame.py(c as f64);
        let ph = frame.py(0.0) - py;
        svg.push_str(&format!(
            "<rect x=\"{px:.2}\" y=\"{py:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" \
             fill=\"#88bbdd\" stroke=\"#336699\" stroke-width=\"0.5\"/>\n"
        ));
    }
    if overlay_normal {
        let scale = total as f64 * bin_w;
        let curve: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let x = hist.lo + (hist.hi - hist.lo) * i as f64 / 200.0;
                let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
                (frame.px(x), frame.py(density * scale))
            })
            .collect();
        svg.push_str(&polyline(&curve, "#cc3333", 1.5));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Empirical (solid) vs theoretical (dashed) power against distance D.
pub fn svg_power(power: &[TargetPower]) -> anyhow::Result<String> {
    if power.is_empty() {
        bail!("cannot plot an empty power curve");
    }
    let mut sorted: Vec<&TargetPower> = power.iter().collect();
    sorted.sort_by(|a, b| a.d_true.total_cmp(&b.d_true));
    let frame = Frame {
        x0: sorted.first().unwrap().d_true,
        x1: sorted.last().unwrap().d_true.max(1e-9),
        y0: 0.0,
        y1: 1.0,
    };
    let emp: Vec<(f64, f64)> = sorted
        .iter()
        .map(|p| (frame.px(p.d_true), frame.py(p.empirical)))
        .collect();
    let theo: Vec<(f64, f64)> = sorted
        .iter()
        .map(|p| (frame.px(p.d_true), frame.py(p.theoretical)))
        .collect();
    let mut svg = header();
    svg.push_str(&polyline(&theo, "#3355cc", 1.5));
    svg.push_str(&polyline(&emp, "#cc3333", 1.5));
    for (x, y) in &emp {
        svg.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"#cc3333\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// p-value heat grid: darker cells mean smaller p.
pub fn svg_pmap(entries: &[(DVector<f64>, f64)], steps: &[usize]) -> anyhow::Result<String> {
    if entries.is_empty() {
        bail!("cannot plot an empty p-value map");
    }
    if steps.len() != 2 || entries[0].0.len() != 2 {
        bail!("SVG p-value maps need d = 2");
    }
    let frame = Frame::from_bounds(entries.iter().map(|(p, _)| (p[0], p[1])));
    let cell_w = (W - 2.0 * MARGIN) / steps[1] as f64;
    let cell_h = (H - 2.0 * MARGIN) / steps[0] as f64;
    let mut svg = header();
    for (point, p) in entries {
        let px = frame.px(point[1]) - cell_w / 2.0;
        let py = frame.py(point[0]) - cell_h / 2.0;
        let shade = (255.0 * p.clamp(0.0, 1.0)) as u8;
        svg.push_str(&format!(
            "<rect x=\"{px:.2}\" y=\"{py:.2}\" width=\"{cell_w:.2}\" height=\"{cell_h:.2}\" \
             fill=\"rgb({shade},{shade},255)\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
