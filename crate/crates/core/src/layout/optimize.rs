//! Final overlap removal for annotation rectangles.

use super::geometry::{Point, Rect};

const ROUNDS: usize = 500;

/// Outcome of overlap removal.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub rects: Vec<Rect>,
    /// Rectangle pairs still closer than the margin.
    pub residual: usize,
}

fn clamp_into(r: &mut Rect, bounds: &Rect) {
    let lo = bounds.min();
    let hi = bounds.max();
    r.cx = r.cx.clamp(lo[0] + r.w / 2.0, (hi[0] - r.w / 2.0).max(lo[0] + r.w / 2.0));
    r.cy = r.cy.clamp(lo[1] + r.h / 2.0, (hi[1] - r.h / 2.0).max(lo[1] + r.h / 2.0));
}

/// Penetration of `a` and `b` including the margin along x and y.
fn penetration(a: &Rect, b: &Rect, margin: f64) -> (f64, f64) {
    (
        (a.w + b.w) / 2.0 + margin - (a.cx - b.cx).abs(),
        (a.h + b.h) / 2.0 + margin - (a.cy - b.cy).abs(),
    )
}

fn too_close(a: &Rect, b: &Rect, margin: f64) -> bool {
    let (px, py) = penetration(a, b, margin);
    px > 1e-9 && py > 1e-9
}

/// Sign of the push of `a` away from `b` along one axis; coincident
/// centres split by index.
fn side(a: f64, b: f64, ia: usize, ib: usize) -> f64 {
    if a != b {
        (a - b).signum()
    } else if ia < ib {
        -1.0
    } else {
        1.0
    }
}

/// Number of rectangle pairs closer than `margin`.
pub fn count_conflicts(rects: &[Rect], margin: f64) -> usize {
    let mut n = 0;
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            if too_close(&rects[i], &rects[j], margin) {
                n += 1;
            }
        }
    }
    n
}

/// Moves annotations apart along the axis of least penetration until every
/// pair is at least `margin` apart, and off node discs where that does not
/// create new conflicts. Pinned rectangles never move. Inputs without
/// conflicts come back unchanged.
pub fn optimize_positions(rects: &[Rect], pinned: &[bool], nodes: &[(Point, f64)], bounds: &Rect, margin: f64) -> Optimized {
    let mut out = rects.to_vec();
    let fixed = |i: usize| pinned.get(i).copied().unwrap_or(false);

    // Nodes first: nudge a rect off a disc when the nudge stays clear of
    // the other rects.
    for i in 0..out.len() {
        if fixed(i) {
            continue;
        }
        for &(p, r) in nodes {
            if !out[i].touches_disc(p, r) {
                continue;
            }
            let mut best: Option<Rect> = None;
            for (dx, dy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                let mut c = out[i];
                if dx != 0.0 {
                    c.cx = p[0] + dx * (c.w / 2.0 + r + 1.0);
                } else {
                    c.cy = p[1] + dy * (c.h / 2.0 + r + 1.0);
                }
                clamp_into(&mut c, bounds);
                let clear = !c.touches_disc(p, r)
                    && out.iter().enumerate().all(|(j, o)| j == i || !too_close(&c, o, margin));
                let shift = (c.cx - out[i].cx).abs() + (c.cy - out[i].cy).abs();
                if clear && best.is_none_or(|b| shift < (b.cx - out[i].cx).abs() + (b.cy - out[i].cy).abs()) {
                    best = Some(c);
                }
            }
            if let Some(b) = best {
                out[i] = b;
            }
        }
    }

    for _ in 0..ROUNDS {
        let mut moved = false;
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                if !too_close(&out[i], &out[j], margin) || (fixed(i) && fixed(j)) {
                    continue;
                }
                let (px, py) = penetration(&out[i], &out[j], margin);
                let (share_i, share_j) = match (fixed(i), fixed(j)) {
                    (true, _) => (0.0, 1.0),
                    (_, true) => (1.0, 0.0),
                    _ => (0.5, 0.5),
                };
                if px <= py {
                    let s = side(out[i].cx, out[j].cx, i, j);
                    out[i].cx += s * px * share_i;
                    out[j].cx -= s * px * share_j;
                } else {
                    let s = side(out[i].cy, out[j].cy, i, j);
                    out[i].cy += s * py * share_i;
                    out[j].cy -= s * py * share_j;
                }
                for k in [i, j] {
                    if !fixed(k) {
                        clamp_into(&mut out[k], bounds);
                    }
                }
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    // Walls can trap a pair; relocate the offender to the nearest free spot.
    for i in 0..out.len() {
        if fixed(i) || !out.iter().enumerate().any(|(j, o)| j != i && too_close(&out[i], o, margin)) {
            continue;
        }
        if let Some(c) = nearest_free(&out, i, bounds, margin) {
            out[i] = c;
        }
    }

    let residual = count_conflicts(&out, margin);
    if residual > 0 {
        log::warn!("{residual} annotation pairs still overlap after optimization");
    }
    Optimized { rects: out, residual }
}

fn nearest_free(rects: &[Rect], i: usize, bounds: &Rect, margin: f64) -> Option<Rect> {
    let step = 10.0;
    let reach = bounds.w.max(bounds.h);
    let mut radius = step;
    while radius <= reach {
        for k in 0..72 {
            let a = k as f64 * std::f64::consts::TAU / 72.0;
            let mut c = rects[i];
            c.cx += radius * a.cos();
            c.cy += radius * a.sin();
            let lo = bounds.min();
            let hi = bounds.max();
            if c.cx - c.w / 2.0 < lo[0] || c.cx + c.w / 2.0 > hi[0] || c.cy - c.h / 2.0 < lo[1] || c.cy + c.h / 2.0 > hi[1] {
                continue;
            }
            if rects.iter().enumerate().all(|(j, o)| j == i || !too_close(&c, o, margin)) {
                return Some(c);
            }
        }
        radius += step;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn canvas() -> Rect {
        Rect::new([600.0, 800.0], 1200.0, 1600.0)
    }

    #[test]
    fn disjoint_input_is_fixed_point() {
        let rects = vec![Rect::new([100.0, 100.0], 50.0, 30.0), Rect::new([300.0, 100.0], 50.0, 30.0)];
        let o = optimize_positions(&rects, &[], &[], &canvas(), 20.0);
        assert_eq!(o.rects, rects);
        assert_eq!(o.residual, 0);
    }

    #[test]
    fn identical_rects_split_along_short_axis() {
        let r = Rect::new([500.0, 500.0], 100.0, 40.0);
        let o = optimize_positions(&[r, r], &[], &[], &canvas(), 20.0);
        let (a, b) = (o.rects[0], o.rects[1]);
        assert_eq!(a.cx, b.cx);
        assert!((a.cy - b.cy).abs() - 40.0 >= 20.0 - 1e-9);
    }

    #[test]
    fn pinned_rect_stays() {
        let r = Rect::new([500.0, 500.0], 100.0, 40.0);
        let o = optimize_positions(&[r, r], &[true, false], &[], &canvas(), 20.0);
        assert_eq!(o.rects[0], r);
        assert_eq!(o.residual, 0);
    }

    #[test]
    fn rect_leaves_node_disc() {
        let r = Rect::new([500.0, 500.0], 100.0, 40.0);
        let o = optimize_positions(&[r], &[], &[([500.0, 510.0], 6.0)], &canvas(), 20.0);
        assert!(!o.rects[0].touches_disc([500.0, 510.0], 6.0));
    }

    proptest! {
        #[test]
        fn no_overlaps_remain(seed in prop::collection::vec((140.0..1060.0f64, 300.0..1300.0f64, 60.0..280.0f64, 30.0..160.0f64), 1..9)) {
            let rects: Vec<Rect> = seed.iter().map(|&(x, y, w, h)| Rect::new([x, y], w, h)).collect();
            let o = optimize_positions(&rects, &[], &[], &canvas(), 20.0);
            prop_assert_eq!(o.residual, 0);
            for r in &o.rects {
                prop_assert!(r.min()[0] >= -1e-9 && r.max()[0] <= 1200.0 + 1e-9);
            }
        }
    }
}
