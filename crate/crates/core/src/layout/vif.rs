//! Reading-path patterns and their alignment to the data elements of the
//! rough layout.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::geometry::{add, centroid, dist, scale, sub, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VifKind {
    Landscape,
    Clock,
    LeftWing,
    RightWing,
}

impl VifKind {
    /// Tie-break order.
    pub const ALL: [VifKind; 4] = [VifKind::Landscape, VifKind::Clock, VifKind::LeftWing, VifKind::RightWing];

    pub fn name(self) -> &'static str {
        match self {
            VifKind::Landscape => "landscape",
            VifKind::Clock => "clock",
            VifKind::LeftWing => "left-wing",
            VifKind::RightWing => "right-wing",
        }
    }

    /// `k` evenly spaced points of the pattern in a y-down frame.
    pub fn canonical(self, k: usize) -> Vec<Point> {
        let t = |i: usize| if k <= 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
        (0..k)
            .map(|i| match self {
                VifKind::Landscape => [i as f64, 0.0],
                VifKind::Clock => {
                    let phi = 2.0 * PI * i as f64 / k as f64;
                    [phi.sin(), -phi.cos()]
                }
                VifKind::LeftWing => {
                    let th = -FRAC_PI_4 + t(i) * 2.0 * FRAC_PI_4;
                    [th.cos(), th.sin()]
                }
                VifKind::RightWing => {
                    let th = -FRAC_PI_4 + t(i) * 2.0 * FRAC_PI_4;
                    [-th.cos(), th.sin()]
                }
            })
            .collect()
    }
}

/// Chosen pattern and its anchor polyline, one point per data element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifPattern {
    pub kind: VifKind,
    pub anchors: Vec<Point>,
    /// Fréchet distance between the data polyline and the aligned pattern.
    pub distance: f64,
}

/// Discrete Fréchet distance between two polylines.
pub fn frechet(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { f64::INFINITY };
    }
    let (n, m) = (a.len(), b.len());
    let mut ca = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let d = dist(a[i], b[j]);
            ca[i][j] = match (i, j) {
                (0, 0) => d,
                (0, _) => ca[0][j - 1].max(d),
                (_, 0) => ca[i - 1][0].max(d),
                _ => ca[i - 1][j].min(ca[i - 1][j - 1]).min(ca[i][j - 1]).max(d),
            };
        }
    }
    ca[n - 1][m - 1]
}

/// Aligns `shape` onto `target` by translation, uniform scale and rotation
/// (no reflection), returning the aligned points.
pub fn procrustes(target: &[Point], shape: &[Point]) -> Vec<Point> {
    let ct = centroid(target.iter().copied());
    let cs = centroid(shape.iter().copied());
    let t: Vec<Point> = target.iter().map(|&p| sub(p, ct)).collect();
    let s: Vec<Point> = shape.iter().map(|&p| sub(p, cs)).collect();
    let nt = t.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>().sqrt();
    let ns = s.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>().sqrt();
    if ns == 0.0 {
        return vec![ct; shape.len()];
    }
    let (mut dot, mut crs) = (0.0, 0.0);
    for (x, y) in s.iter().zip(&t) {
        dot += x[0] * y[0] + x[1] * y[1];
        crs += x[0] * y[1] - x[1] * y[0];
    }
    let th = crs.atan2(dot);
    let (sin, cos) = th.sin_cos();
    let k = nt / ns;
    s.iter().map(|p| add(ct, scale([cos * p[0] - sin * p[1], sin * p[0] + cos * p[1]], k))).collect()
}

/// Picks the pattern whose aligned polyline is closest to the element
/// centroids in narrative order. Clock anchors are rescaled to a circle
/// whose diameter is `diameter`.
pub fn select_vif_pattern(centroids: &[Point], diameter: f64) -> VifPattern {
    let k = centroids.len();
    let c = centroid(centroids.iter().copied());
    let spread = centroids.iter().map(|&p| dist(p, c)).fold(0.0, f64::max);
    if k <= 1 || spread < 1e-9 {
        let step = if k <= 1 { 0.0 } else { diameter.max(1.0) / (k - 1) as f64 };
        let anchors = (0..k).map(|i| add(c, [(i as f64 - (k as f64 - 1.0) / 2.0) * step, 0.0])).collect();
        return VifPattern { kind: VifKind::Landscape, anchors, distance: 0.0 };
    }
    let tol = 1e-9 * spread;
    let mut best: Option<VifPattern> = None;
    for kind in VifKind::ALL {
        let anchors = procrustes(centroids, &kind.canonical(k));
        let distance = frechet(centroids, &anchors);
        if best.as_ref().is_none_or(|b| distance < b.distance - tol) {
            best = Some(VifPattern { kind, anchors, distance });
        }
    }
    let mut best = best.expect("four candidates");
    if best.kind == VifKind::Clock && diameter > 0.0 {
        let ac = centroid(best.anchors.iter().copied());
        let r = best.anchors.iter().map(|&p| dist(p, ac)).fold(0.0, f64::max);
        if r > 0.0 {
            let k = diameter / 2.0 / r;
            best.anchors = best.anchors.iter().map(|&p| add(ac, scale(sub(p, ac), k))).collect();
        }
    }
    best
}
