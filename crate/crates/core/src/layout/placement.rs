//! Annotation placement: the quality function and a harmony search over
//! rectangle centres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{dist, segments_cross, sin_angle, union_area, Point, Rect};
use super::HarmonyConfig;
use crate::error::{Error, Result};

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quality {
    pub Q: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
}

impl Quality {
    pub fn empty() -> Self {
        Quality { Q: 1.0, m1: 1.0, m2: 1.0, m3: 1.0, m4: 1.0, m5: 1.0 }
    }
}

/// One annotation to place.
#[derive(Debug, Clone, PartialEq)]
pub struct Placeable {
    pub id: String,
    pub width: f64,
    pub height: f64,
    /// Leader source points, one per focus component.
    pub sources: Vec<Point>,
    /// Focus centre Fᵢ.
    pub focus: Point,
    /// Anchor Aᵢ of the annotation's data element.
    pub anchor: Point,
    /// Fixed centre, excluded from the search.
    pub pinned: Option<Point>,
}

/// Everything the quality function looks at.
#[derive(Debug, Clone)]
pub struct PlacementProblem {
    pub nodes: Vec<Point>,
    pub node_radii: Vec<f64>,
    /// Importance T(i) of each node.
    pub importance: Vec<f64>,
    pub items: Vec<Placeable>,
    /// Region every rectangle must stay inside.
    pub bounds: Rect,
    pub weights: [f64; 5],
    pub radius: f64,
}

/// Leader segments (source, attachment on the rect border) for the given
/// rectangles.
pub fn leaders_for(items: &[Placeable], rects: &[Rect]) -> Vec<(usize, Point, Point)> {
    let mut out = vec![];
    for (i, (it, r)) in items.iter().zip(rects).enumerate() {
        for &s in &it.sources {
            out.push((i, s, r.border_toward(s)));
        }
    }
    out
}

impl PlacementProblem {
    pub fn rects(&self, centers: &[Point]) -> Vec<Rect> {
        self.items.iter().zip(centers).map(|(it, &c)| Rect::new(c, it.width, it.height)).collect()
    }

    /// Q and its five metrics for rectangles centred at `centers`.
    pub fn quality(&self, centers: &[Point]) -> Quality {
        let m = self.items.len();
        if m == 0 {
            return Quality::empty();
        }
        let rects = self.rects(centers);

        let total_t: f64 = self.importance.iter().sum();
        let m1 = if total_t > 0.0 {
            let free: f64 = self
                .nodes
                .iter()
                .zip(&self.node_radii)
                .zip(&self.importance)
                .filter(|((&p, &r), _)| !rects.iter().any(|rc| rc.touches_disc(p, r)))
                .map(|(_, &t)| t)
                .sum();
            free / total_t
        } else {
            1.0
        };

        let total_area: f64 = rects.iter().map(Rect::area).sum();
        let m2 = (union_area(&rects) / total_area).clamp(0.0, 1.0);

        let leaders = leaders_for(&self.items, &rects);
        let n = leaders.len();
        let m3 = if n < 2 {
            1.0
        } else {
            let mut sum = 0.0;
            for a in 0..n {
                for b in a + 1..n {
                    let (_, p1, q1) = leaders[a];
                    let (_, p2, q2) = leaders[b];
                    sum += if segments_cross(p1, q1, p2, q2) { sin_angle(p1, q1, p2, q2) } else { 1.0 };
                }
            }
            sum / (n * (n - 1) / 2) as f64
        };

        let s = self.radius;
        let to_focus: f64 = self.items.iter().zip(centers).map(|(it, &c)| dist(c, it.focus)).sum();
        let m4 = (1.0 - to_focus / (n.max(1) as f64 * s)).clamp(0.0, 1.0);
        let to_anchor: f64 = self.items.iter().zip(centers).map(|(it, &c)| dist(c, it.anchor)).sum();
        let m5 = (1.0 - to_anchor / (m as f64 * s)).clamp(0.0, 1.0);

        let ms = [m1, m2, m3, m4, m5];
        let q = ms.iter().zip(&self.weights).map(|(m, w)| m * w).sum();
        Quality { Q: q, m1, m2, m3, m4, m5 }
    }

    /// Box of admissible centres for item `i`.
    fn center_box(&self, i: usize) -> (Point, Point) {
        let it = &self.items[i];
        let lo = self.bounds.min();
        let hi = self.bounds.max();
        (
            [lo[0] + it.width / 2.0, lo[1] + it.height / 2.0],
            [hi[0] - it.width / 2.0, hi[1] - it.height / 2.0],
        )
    }

    /// Projects a centre onto the search disc around Fᵢ, then into the
    /// bounds.
    pub fn clamp(&self, i: usize, p: Point) -> Point {
        let f = self.items[i].focus;
        let d = dist(p, f);
        let mut q = if d > self.radius { [f[0] + (p[0] - f[0]) * self.radius / d, f[1] + (p[1] - f[1]) * self.radius / d] } else { p };
        let (lo, hi) = self.center_box(i);
        q[0] = q[0].clamp(lo[0], hi[0]);
        q[1] = q[1].clamp(lo[1], hi[1]);
        q
    }

    /// Uniform random centre in the search disc of item `i`.
    pub fn random_center(&self, i: usize, rng: &mut impl Rng) -> Point {
        if let Some(p) = self.items[i].pinned {
            return p;
        }
        let f = self.items[i].focus;
        let r = self.radius * rng.random::<f64>().sqrt();
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        self.clamp(i, [f[0] + r * a.cos(), f[1] + r * a.sin()])
    }

    pub fn random_placement(&self, rng: &mut impl Rng) -> Vec<Point> {
        (0..self.items.len()).map(|i| self.random_center(i, rng)).collect()
    }

    /// Rejects annotations that cannot fit inside the bounds.
    pub fn check(&self) -> Result<()> {
        for it in &self.items {
            if it.width > self.bounds.w || it.height > self.bounds.h || it.width <= 0.0 || it.height <= 0.0 {
                return Err(Error::AnnotationTooLarge(it.id.clone()));
            }
        }
        Ok(())
    }
}

/// Harmony-search result: best centres, their quality and the best-so-far
/// Q after each improvisation.
#[derive(Debug, Clone)]
pub struct Placement {
    pub centers: Vec<Point>,
    pub quality: Quality,
    pub trace: Vec<f64>,
}

/// Maximizes Q by harmony search over the centres of unpinned annotations.
pub fn place_annotations(problem: &PlacementProblem, hs: &HarmonyConfig, seed: u64) -> Result<Placement> {
    problem.check()?;
    let m = problem.items.len();
    if m == 0 {
        return Ok(Placement { centers: vec![], quality: Quality::empty(), trace: vec![1.0] });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = hs.memory.max(1);
    let mut memory: Vec<(Vec<Point>, f64)> = (0..size)
        .map(|_| {
            let c = problem.random_placement(&mut rng);
            let q = problem.quality(&c).Q;
            (c, q)
        })
        .collect();
    let best_of = |mem: &[(Vec<Point>, f64)]| {
        mem.iter().enumerate().fold(0, |b, (i, h)| if h.1 > mem[b].1 { i } else { b })
    };
    let mut best = memory[best_of(&memory)].clone();
    let mut trace = vec![best.1];
    let bw = problem.radius / 20.0;
    for _ in 0..hs.iterations {
        let mut fresh = Vec::with_capacity(m);
        for i in 0..m {
            if let Some(p) = problem.items[i].pinned {
                fresh.push(p);
                continue;
            }
            let mut p = [0.0; 2];
            for (axis, slot) in p.iter_mut().enumerate() {
                *slot = if rng.random::<f64>() < hs.hmcr {
                    let v = memory[rng.random_range(0..size)].0[i][axis];
                    if rng.random::<f64>() < hs.par {
                        v + rng.random_range(-1.0..1.0) * bw
                    } else {
                        v
                    }
                } else {
                    problem.random_center(i, &mut rng)[axis]
                };
            }
            fresh.push(problem.clamp(i, p));
        }
        let q = problem.quality(&fresh).Q;
        let worst = memory.iter().enumerate().fold(0, |w, (i, h)| if h.1 < memory[w].1 { i } else { w });
        if q > memory[worst].1 {
            memory[worst] = (fresh.clone(), q);
        }
        if q > best.1 {
            best = (fresh, q);
        }
        trace.push(best.1);
    }
    let quality = problem.quality(&best.0);
    Ok(Placement { centers: best.0, quality, trace })
}

/// Default importance T(i): 1 for nodes of data elements, degree over the
/// maximum degree otherwise.
pub fn importance(degrees: &[usize], element_nodes: &[bool]) -> Vec<f64> {
    let dmax = degrees.iter().copied().max().unwrap_or(0).max(1) as f64;
    degrees.iter().zip(element_nodes).map(|(&d, &e)| if e { 1.0 } else { d as f64 / dmax }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::LayoutConfig;
    use proptest::prelude::*;

    fn problem(items: Vec<Placeable>) -> PlacementProblem {
        PlacementProblem {
            nodes: vec![[100.0, 100.0], [400.0, 400.0], [700.0, 300.0]],
            node_radii: vec![6.0; 3],
            importance: vec![1.0, 0.5, 0.25],
            items,
            bounds: Rect::new([600.0, 800.0], 1200.0, 1600.0),
            weights: LayoutConfig::default().weights,
            radius: 300.0,
        }
    }

    fn item(id: &str, focus: Point) -> Placeable {
        Placeable { id: id.into(), width: 120.0, height: 60.0, sources: vec![focus], focus, anchor: focus, pinned: None }
    }

    #[test]
    fn empty_placement_has_unit_quality() {
        let p = problem(vec![]);
        let r = place_annotations(&p, &HarmonyConfig::default(), 0).unwrap();
        assert!(r.centers.is_empty());
        assert_eq!(r.quality.Q, 1.0);
    }

    #[test]
    fn disjoint_rects_on_focus() {
        let p = problem(vec![item("a", [300.0, 300.0]), item("b", [800.0, 900.0])]);
        let q = p.quality(&[[300.0, 300.0], [800.0, 900.0]]);
        assert_eq!(q.m2, 1.0);
        assert_eq!(q.m4, 1.0);
        assert_eq!(q.m3, 1.0);
    }

    #[test]
    fn oversized_annotation_is_named() {
        let mut big = item("huge", [10.0, 10.0]);
        big.width = 5000.0;
        let err = place_annotations(&problem(vec![big]), &HarmonyConfig::default(), 0).unwrap_err();
        assert_eq!(err, Error::AnnotationTooLarge("huge".into()));
    }

    #[test]
    fn best_so_far_is_monotone_and_beats_random() {
        let items = vec![item("a", [120.0, 120.0]), item("b", [160.0, 140.0]), item("c", [420.0, 380.0])];
        let p = problem(items);
        let cfg = HarmonyConfig::default();
        let r = place_annotations(&p, &cfg, 7).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let best_random = (0..100).map(|_| p.quality(&p.random_placement(&mut rng)).Q).fold(0.0, f64::max);
        assert!(r.quality.Q >= best_random);
    }

    #[test]
    fn pinned_centres_stay() {
        let mut a = item("a", [300.0, 300.0]);
        a.pinned = Some([333.0, 444.0]);
        let p = problem(vec![a, item("b", [500.0, 500.0])]);
        let r = place_annotations(&p, &HarmonyConfig { iterations: 200, ..Default::default() }, 1).unwrap();
        assert_eq!(r.centers[0], [333.0, 444.0]);
    }

    proptest! {
        #[test]
        fn metrics_in_unit_interval(seed in 0u64..10_000, k in 1usize..5) {
            let items: Vec<Placeable> = (0..k).map(|i| item(&i.to_string(), [150.0 + 200.0 * i as f64, 300.0])).collect();
            let p = problem(items);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = p.quality(&p.random_placement(&mut rng));
            for m in [q.Q, q.m1, q.m2, q.m3, q.m4, q.m5] {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
            }
        }
    }
}
