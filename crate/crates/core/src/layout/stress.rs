//! Stress majorization: the rough layout and the constrained layout with
//! community separation and anchor attraction.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{add, centroid, dist, scale, sub, Point};
use crate::graph::{Graph, NodeIx};

const MAX_SWEEPS: usize = 1000;
const BACKTRACK_STEPS: usize = 12;

/// All-pairs hop distances; pairs in different components get the longest
/// finite distance plus one.
pub fn hop_distances(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    let mut longest = 0.0f64;
    for s in 0..n {
        d[s][s] = 0.0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if d[s][w].is_infinite() {
                    d[s][w] = d[s][v] + 1.0;
                    longest = longest.max(d[s][w]);
                    queue.push_back(w);
                }
            }
        }
    }
    for row in &mut d {
        for x in row.iter_mut() {
            if x.is_infinite() {
                *x = longest + 1.0;
            }
        }
    }
    d
}

/// Weighted stress Σ_{i<j} d⁻² (‖xᵢ − xⱼ‖ − d)².
pub fn stress(x: &[Point], d: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dij = d[i][j];
            s += (dist(x[i], x[j]) - dij).powi(2) / (dij * dij);
        }
    }
    s
}

/// Unit vector from `b` to `a`, with a fixed fallback for coincident points.
fn direction(a: Point, b: Point, i: usize, j: usize) -> Point {
    let v = sub(a, b);
    let l = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if l > 1e-12 {
        scale(v, 1.0 / l)
    } else {
        let t = (i * 31 + j * 17) as f64;
        [t.cos(), t.sin()]
    }
}

/// Extra terms of the constrained layout, all in hop units.
#[derive(Debug, Clone, Default)]
pub struct Constraints {
    /// Communities kept apart by their enclosing circles.
    pub communities: Vec<Vec<NodeIx>>,
    /// Member nodes of each data element and its anchor point.
    pub anchors: Vec<(Vec<NodeIx>, Point)>,
    pub pinned: Vec<bool>,
    pub node_radius: f64,
    pub margin: f64,
    pub community_weight: f64,
    pub anchor_weight: f64,
}

/// Enclosing circle of a node set: centroid and farthest member plus the
/// node radius.
pub fn enclosing_circle(x: &[Point], members: &[NodeIx], node_radius: f64) -> (Point, f64) {
    let c = centroid(members.iter().map(|&v| x[v]));
    let r = members.iter().map(|&v| dist(x[v], c)).fold(0.0, f64::max) + node_radius;
    (c, r)
}

/// Penetration depth plus margin of every overlapping community pair.
fn overlaps(x: &[Point], cons: &Constraints) -> Vec<(usize, usize, f64)> {
    let circles: Vec<(Point, f64)> =
        cons.communities.iter().map(|m| enclosing_circle(x, m, cons.node_radius)).collect();
    let mut out = vec![];
    for a in 0..circles.len() {
        for b in a + 1..circles.len() {
            let pen = circles[a].1 + circles[b].1 + cons.margin - dist(circles[a].0, circles[b].0);
            if pen > 0.0 {
                out.push((a, b, pen));
            }
        }
    }
    out
}

/// Objective tracked by the constrained layout: stress, squared
/// separation shortfall of overlapping communities and anchor attraction.
pub fn merit(x: &[Point], d: &[Vec<f64>], cons: &Constraints) -> f64 {
    let sep: f64 = overlaps(x, cons).iter().map(|(_, _, p)| p * p).sum();
    let anchor: f64 = cons
        .anchors
        .iter()
        .map(|(members, a)| members.iter().map(|&v| dist(x[v], *a).powi(2)).sum::<f64>())
        .sum();
    stress(x, d) + cons.community_weight * sep + cons.anchor_weight * anchor
}

/// One Gauss-Seidel majorization sweep. `extra[i]` lists separation targets
/// `(j, target length)` and `pulls[i]` the anchors attracting node i.
fn sweep(x: &mut [Point], d: &[Vec<f64>], extra: &[Vec<(usize, f64)>], pulls: &[Vec<Point>], cons: &Constraints) {
    let n = x.len();
    for i in 0..n {
        if cons.pinned.get(i).copied().unwrap_or(false) {
            continue;
        }
        let mut num = [0.0, 0.0];
        let mut den = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let w = 1.0 / (d[i][j] * d[i][j]);
            let u = direction(x[i], x[j], i, j);
            num = add(num, scale(add(x[j], scale(u, d[i][j])), w));
            den += w;
        }
        for &(j, target) in &extra[i] {
            let u = direction(x[i], x[j], i, j);
            num = add(num, scale(add(x[j], scale(u, target)), cons.community_weight));
            den += cons.community_weight;
        }
        for &a in &pulls[i] {
            num = add(num, scale(a, cons.anchor_weight));
            den += cons.anchor_weight;
        }
        if den > 0.0 {
            x[i] = scale(num, 1.0 / den);
        }
    }
}

/// Stress majorization from a seeded random start until the relative
/// stress decrease falls below `tolerance`. Returns hop-unit positions and
/// the stress after each sweep.
pub fn rough_layout(g: &Graph, tolerance: f64, seed: u64) -> (Vec<Point>, Vec<f64>) {
    let n = g.node_count();
    if n <= 1 {
        return (vec![[0.0, 0.0]; n], vec![0.0]);
    }
    let d = hop_distances(g);
    let side = (n as f64).sqrt() * 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Point> = (0..n).map(|_| [rng.random_range(0.0..side), rng.random_range(0.0..side)]).collect();
    let cons = Constraints { pinned: vec![false; n], ..Default::default() };
    let empty_extra = vec![vec![]; n];
    let empty_pulls = vec![vec![]; n];
    let mut trace = vec![stress(&x, &d)];
    for _ in 0..MAX_SWEEPS {
        sweep(&mut x, &d, &empty_extra, &empty_pulls, &cons);
        let s = stress(&x, &d);
        let prev = *trace.last().unwrap();
        trace.push(s);
        if prev - s <= tolerance * prev.max(1e-300) {
            break;
        }
    }
    let c = centroid(x.iter().copied());
    (x.iter().map(|&p| sub(p, c)).collect(), trace)
}

/// Minimizes the constrained objective from `start`, accepting a sweep only
/// when the objective does not increase (halving the step otherwise).
/// Returns positions, the objective trace and whether the relative decrease
/// fell below `tolerance` within the iteration cap.
pub fn constrained_layout(g: &Graph, start: &[Point], cons: &Constraints, tolerance: f64) -> (Vec<Point>, Vec<f64>, bool) {
    let n = g.node_count();
    if n <= 1 {
        return (start.to_vec(), vec![0.0], true);
    }
    let d = hop_distances(g);
    let mut x = start.to_vec();
    let mut pulls = vec![vec![]; n];
    for (members, a) in &cons.anchors {
        for &v in members {
            pulls[v].push(*a);
        }
    }
    let mut current = merit(&x, &d, cons);
    let mut trace = vec![current];
    for _ in 0..MAX_SWEEPS {
        let mut extra = vec![vec![]; n];
        for (a, b, pen) in overlaps(&x, cons) {
            for &i in &cons.communities[a] {
                for &j in &cons.communities[b] {
                    let target = dist(x[i], x[j]) + pen;
                    extra[i].push((j, target));
                    extra[j].push((i, target));
                }
            }
        }
        let mut candidate = x.clone();
        sweep(&mut candidate, &d, &extra, &pulls, cons);
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..BACKTRACK_STEPS {
            let trial: Vec<Point> = x.iter().zip(&candidate).map(|(&a, &b)| add(a, scale(sub(b, a), t))).collect();
            let m = merit(&trial, &d, cons);
            if m <= current {
                accepted = Some((trial, m));
                break;
            }
            t /= 2.0;
        }
        let Some((next, m)) = accepted else { return (x, trace, true) };
        let done = current - m <= tolerance * current.max(1e-300);
        x = next;
        current = m;
        trace.push(m);
        if done {
            return (x, trace, true);
        }
    }
    log::warn!("constrained layout stopped at the iteration cap");
    (x, trace, false)
}

/// Rigidly pushes overlapping communities apart until every pair of
/// enclosing circles is at least `margin` apart. Communities holding a
/// pinned node stay put. Returns whether every pair was separated.
pub fn separate_communities(x: &mut [Point], communities: &[Vec<NodeIx>], node_radius: f64, margin: f64, pinned: &[bool]) -> bool {
    let fixed: Vec<bool> = communities.iter().map(|m| m.iter().any(|&v| pinned.get(v).copied().unwrap_or(false))).collect();
    for _ in 0..2000 {
        let mut moved = false;
        for a in 0..communities.len() {
            for b in a + 1..communities.len() {
                let (ca, ra) = enclosing_circle(x, &communities[a], node_radius);
                let (cb, rb) = enclosing_circle(x, &communities[b], node_radius);
                let gap = dist(ca, cb) - ra - rb;
                if gap >= margin - 1e-9 {
                    continue;
                }
                if fixed[a] && fixed[b] {
                    continue;
                }
                let need = margin - gap + 1e-6;
                let u = direction(cb, ca, b, a);
                let (sa, sb) = match (fixed[a], fixed[b]) {
                    (true, _) => (0.0, need),
                    (_, true) => (need, 0.0),
                    _ => (need / 2.0, need / 2.0),
                };
                for &v in &communities[a] {
                    x[v] = sub(x[v], scale(u, sa));
                }
                for &v in &communities[b] {
                    x[v] = add(x[v], scale(u, sb));
                }
                moved = true;
            }
        }
        if !moved {
            return true;
        }
    }
    false
}
