//! Plane geometry helpers shared by the layout stages.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

pub fn centroid(points: impl IntoIterator<Item = Point>) -> Point {
    let mut c = [0.0, 0.0];
    let mut n = 0usize;
    for p in points {
        c = add(c, p);
        n += 1;
    }
    if n == 0 {
        c
    } else {
        scale(c, 1.0 / n as f64)
    }
}

/// Axis-aligned rectangle given by its centre and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(center: Point, w: f64, h: f64) -> Self {
        Rect { cx: center[0], cy: center[1], w, h }
    }

    pub fn center(&self) -> Point {
        [self.cx, self.cy]
    }

    pub fn min(&self) -> Point {
        [self.cx - self.w / 2.0, self.cy - self.h / 2.0]
    }

    pub fn max(&self) -> Point {
        [self.cx + self.w / 2.0, self.cy + self.h / 2.0]
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Interiors overlap (touching edges do not count).
    pub fn intersects(&self, o: &Rect) -> bool {
        (self.cx - o.cx).abs() < (self.w + o.w) / 2.0 && (self.cy - o.cy).abs() < (self.h + o.h) / 2.0
    }

    /// Largest edge gap between the two rectangles along either axis;
    /// negative when they overlap.
    pub fn gap(&self, o: &Rect) -> f64 {
        let gx = (self.cx - o.cx).abs() - (self.w + o.w) / 2.0;
        let gy = (self.cy - o.cy).abs() - (self.h + o.h) / 2.0;
        gx.max(gy)
    }

    pub fn contains(&self, p: Point) -> bool {
        (p[0] - self.cx).abs() <= self.w / 2.0 && (p[1] - self.cy).abs() <= self.h / 2.0
    }

    /// The rectangle and a disc of radius `r` at `p` overlap.
    pub fn touches_disc(&self, p: Point, r: f64) -> bool {
        let dx = ((p[0] - self.cx).abs() - self.w / 2.0).max(0.0);
        let dy = ((p[1] - self.cy).abs() - self.h / 2.0).max(0.0);
        dx * dx + dy * dy < r * r
    }

    /// Point where the ray from the centre towards `p` leaves the border.
    pub fn border_toward(&self, p: Point) -> Point {
        let d = sub(p, self.center());
        if d[0] == 0.0 && d[1] == 0.0 {
            return [self.cx, self.cy - self.h / 2.0];
        }
        let tx = if d[0] == 0.0 { f64::INFINITY } else { (self.w / 2.0) / d[0].abs() };
        let ty = if d[1] == 0.0 { f64::INFINITY } else { (self.h / 2.0) / d[1].abs() };
        let t = tx.min(ty);
        let mut q = add(self.center(), scale(d, t));
        // Snap the binding coordinate so the point lies exactly on the border.
        if tx <= ty {
            q[0] = self.cx + self.w / 2.0 * d[0].signum();
        } else {
            q[1] = self.cy + self.h / 2.0 * d[1].signum();
        }
        q
    }

    /// Distance from `p` to the border.
    pub fn border_distance(&self, p: Point) -> f64 {
        let dx = (p[0] - self.cx).abs() - self.w / 2.0;
        let dy = (p[1] - self.cy).abs() - self.h / 2.0;
        if dx <= 0.0 && dy <= 0.0 {
            -dx.max(dy)
        } else {
            dx.max(0.0).hypot(dy.max(0.0))
        }
    }
}

/// Area of the union of rectangles, by coordinate compression.
pub fn union_area(rects: &[Rect]) -> f64 {
    let mut xs: Vec<f64> = rects.iter().flat_map(|r| [r.min()[0], r.max()[0]]).collect();
    let mut ys: Vec<f64> = rects.iter().flat_map(|r| [r.min()[1], r.max()[1]]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut area = 0.0;
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ys.len().saturating_sub(1) {
            let mid = [(xs[i] + xs[i + 1]) / 2.0, (ys[j] + ys[j + 1]) / 2.0];
            if rects.iter().any(|r| r.contains(mid)) {
                area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
            }
        }
    }
    area
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Proper crossing of two segments (shared endpoints and touching do not
/// count).
pub fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Sine of the angle between two segments.
pub fn sin_angle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    let u = sub(b, a);
    let v = sub(d, c);
    let denom = norm(u) * norm(v);
    if denom == 0.0 {
        return 1.0;
    }
    ((u[0] * v[1] - u[1] * v[0]).abs() / denom).clamp(0.0, 1.0)
}

/// Convex hull (counter-clockwise in a y-up frame) by monotone chain.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = vec![];
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = vec![];
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
