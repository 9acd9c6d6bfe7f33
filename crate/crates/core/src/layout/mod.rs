//! Node positions, reading-path anchors and annotation placement on the
//! poster canvas.

pub mod geometry;
pub mod optimize;
pub mod placement;
pub mod stress;
pub mod vif;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeIx};
pub use geometry::{Point, Rect};
use geometry::{add, centroid, scale, sub};
pub use optimize::{count_conflicts, optimize_positions, Optimized};
pub use placement::{place_annotations, Placeable, Placement, PlacementProblem, Quality};
pub use stress::{constrained_layout, hop_distances, rough_layout, separate_communities, Constraints};
pub use vif::{frechet, procrustes, select_vif_pattern, VifKind, VifPattern};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarmonyConfig {
    pub memory: usize,
    pub hmcr: f64,
    pub par: f64,
    pub iterations: usize,
}

impl Default for HarmonyConfig {
    fn default() -> Self {
        HarmonyConfig { memory: 20, hmcr: 0.9, par: 0.3, iterations: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    pub stress_tolerance: f64,
    pub community_weight: f64,
    pub anchor_weight: f64,
    /// Separation margin ε in canvas units.
    pub margin: f64,
    /// Placement weights w1..w5.
    pub weights: [f64; 5],
    /// Search radius s around each focus centre.
    pub search_radius: f64,
    pub harmony: HarmonyConfig,
    pub seed: u64,
    pub canvas_width: f64,
    pub canvas_height: f64,
    /// Area the graph is fitted into.
    pub graph_region: Rect,
    /// Area annotations may occupy.
    pub annotation_region: Rect,
    pub node_radius: f64,
    pub glyph_radius: f64,
    pub hull_padding: f64,
    /// Upper bound on canvas units per hop, so small graphs are not blown up.
    pub max_unit: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            stress_tolerance: 1e-4,
            community_weight: 0.5,
            anchor_weight: 0.5,
            margin: 20.0,
            weights: [3.0 / 26.0, 3.0 / 26.0, 10.0 / 26.0, 5.0 / 26.0, 5.0 / 26.0],
            search_radius: 300.0,
            harmony: HarmonyConfig::default(),
            seed: 0,
            canvas_width: 1200.0,
            canvas_height: 1600.0,
            graph_region: Rect::new([600.0, 780.0], 1120.0, 960.0),
            annotation_region: Rect::new([600.0, 790.0], 1180.0, 1020.0),
            node_radius: 6.0,
            glyph_radius: 10.0,
            hull_padding: 15.0,
            max_unit: 90.0,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.weights.iter().any(|w| !(0.0..=1.0).contains(w)) || (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("placement weights must lie in [0, 1] and sum to 1");
        }
        if !(self.search_radius > 0.0) {
            return bad("search radius must be positive");
        }
        if !(self.stress_tolerance > 0.0) || self.margin < 0.0 || self.community_weight < 0.0 || self.anchor_weight < 0.0 {
            return bad("layout tolerance must be positive and weights non-negative");
        }
        let h = &self.harmony;
        if h.memory == 0 || !(0.0..=1.0).contains(&h.hmcr) || !(0.0..=1.0).contains(&h.par) {
            return bad("harmony memory must be non-empty and HMCR, PAR in [0, 1]");
        }
        if !(self.canvas_width > 0.0 && self.canvas_height > 0.0 && self.max_unit > 0.0) {
            return bad("canvas size must be positive");
        }
        Ok(())
    }

    pub fn canvas(&self) -> Rect {
        Rect::new([self.canvas_width / 2.0, self.canvas_height / 2.0], self.canvas_width, self.canvas_height)
    }
}

/// An annotation to lay out: its measured size, the node sets its leaders
/// point at, and the data element whose anchor it is drawn towards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSpec {
    pub id: String,
    pub width: f64,
    pub height: f64,
    pub targets: Vec<Vec<NodeIx>>,
    pub element: usize,
}

#[derive(Debug, Clone)]
pub struct LayoutInput<'a> {
    pub graph: &'a Graph,
    /// Communities kept apart on the canvas.
    pub communities: Vec<Vec<NodeIx>>,
    /// Node sets of the narrative's data elements in reading order.
    pub elements: Vec<Vec<NodeIx>>,
    pub annotations: Vec<AnnotationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedAnnotation {
    pub id: String,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leader {
    pub annotation: String,
    pub from: Point,
    pub to: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutResult {
    /// Canvas position of every node, by node index.
    pub nodes: Vec<Point>,
    pub annotations: Vec<PlacedAnnotation>,
    pub leaders: Vec<Leader>,
    /// Chosen pattern with anchors in canvas units.
    pub pattern: VifPattern,
    pub quality: Quality,
    pub stress_trace: Vec<f64>,
    pub constrained_trace: Vec<f64>,
    pub converged: bool,
    pub residual_overlaps: usize,
}

impl LayoutResult {
    pub fn rect(&self, id: &str) -> Option<&Rect> {
        self.annotations.iter().find(|a| a.id == id).map(|a| &a.rect)
    }

    /// Recomputes every leader from the current node positions and rects.
    pub fn relink(&mut self, specs: &[AnnotationSpec]) {
        self.leaders = leaders(&self.nodes, specs, &self.annotations);
    }
}

fn bbox(points: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Centre of a target node set, used as the leader source.
pub fn target_point(nodes: &[Point], target: &[NodeIx]) -> Point {
    centroid(target.iter().map(|&v| nodes[v]))
}

fn leaders(nodes: &[Point], specs: &[AnnotationSpec], placed: &[PlacedAnnotation]) -> Vec<Leader> {
    let mut out = vec![];
    for (spec, p) in specs.iter().zip(placed) {
        for t in &spec.targets {
            let from = target_point(nodes, t);
            out.push(Leader { annotation: spec.id.clone(), from, to: p.rect.border_toward(from) });
        }
    }
    out
}

/// Canvas scale: units per hop that fit `extent` into the region, capped.
fn unit_for(extent: Point, region: &Rect, cap: f64) -> f64 {
    let fx = if extent[0] > 0.0 { region.w / extent[0] } else { f64::INFINITY };
    let fy = if extent[1] > 0.0 { region.h / extent[1] } else { f64::INFINITY };
    fx.min(fy).min(cap)
}

/// Runs the whole layout: rough layout, pattern selection, constrained
/// layout, canvas fitting, annotation placement and overlap removal.
pub fn compute_layout(input: &LayoutInput, cfg: &LayoutConfig) -> Result<LayoutResult> {
    cfg.validate()?;
    let g = input.graph;
    let n = g.node_count();
    let (rough, stress_trace) = rough_layout(g, cfg.stress_tolerance, cfg.seed);

    let (lo, hi) = bbox(&rough);
    let extent = if n == 0 { [0.0, 0.0] } else { sub(hi, lo) };
    let diagonal = extent[0].hypot(extent[1]);
    let centroids: Vec<Point> = input.elements.iter().map(|e| target_point(&rough, e)).collect();
    let pattern = select_vif_pattern(&centroids, diagonal);

    let region = cfg.graph_region;
    let unit = unit_for(extent, &region, cfg.max_unit);
    let communities: Vec<Vec<NodeIx>> = if input.communities.len() >= 2 { input.communities.clone() } else { vec![] };
    let cons = Constraints {
        communities: communities.clone(),
        anchors: input.elements.iter().cloned().zip(pattern.anchors.iter().copied()).collect(),
        pinned: vec![false; n],
        node_radius: cfg.hull_padding / unit,
        margin: cfg.margin / unit,
        community_weight: cfg.community_weight,
        anchor_weight: cfg.anchor_weight,
    };
    let (hops, constrained_trace, converged) = constrained_layout(g, &rough, &cons, cfg.stress_tolerance);

    // Hop units to canvas units.
    let (lo, hi) = bbox(&hops);
    let extent = if n == 0 { [0.0, 0.0] } else { sub(hi, lo) };
    let unit = unit_for(extent, &region, cfg.max_unit);
    let mid = if n == 0 { [0.0, 0.0] } else { scale(add(lo, hi), 0.5) };
    let to_canvas = |p: Point| add(region.center(), scale(sub(p, mid), unit));
    let mut nodes: Vec<Point> = hops.iter().map(|&p| to_canvas(p)).collect();
    let mut anchors: Vec<Point> = pattern.anchors.iter().map(|&p| to_canvas(p)).collect();

    // Rigid community separation, shrinking back into the region when the
    // pushes spill over.
    let pinned = vec![false; n];
    for _ in 0..5 {
        separate_communities(&mut nodes, &communities, cfg.hull_padding, cfg.margin, &pinned);
        let (lo, hi) = bbox(&nodes);
        let ext = sub(hi, lo);
        let k = unit_for(ext, &region, 1.0);
        if k >= 1.0 {
            break;
        }
        let c = scale(add(lo, hi), 0.5);
        let shrink = |p: Point| add(region.center(), scale(sub(p, c), k));
        nodes = nodes.iter().map(|&p| shrink(p)).collect();
        anchors = anchors.iter().map(|&p| shrink(p)).collect();
    }
    separate_communities(&mut nodes, &communities, cfg.hull_padding, cfg.margin, &pinned);
    if n > 0 {
        let (lo, hi) = bbox(&nodes);
        let shift = sub(region.center(), scale(add(lo, hi), 0.5));
        nodes = nodes.iter().map(|&p| add(p, shift)).collect();
        anchors = anchors.iter().map(|&p| add(p, shift)).collect();
    }

    let pattern = VifPattern { kind: pattern.kind, anchors, distance: pattern.distance };
    let skeleton = LayoutResult {
        nodes,
        annotations: vec![],
        leaders: vec![],
        pattern,
        quality: Quality::empty(),
        stress_trace,
        constrained_trace,
        converged,
        residual_overlaps: 0,
    };
    place_and_optimize(input, skeleton, &BTreeSet::new(), cfg)
}

/// Annotation placement and overlap removal on fixed node positions.
/// Annotations named in `pinned` keep their rect from `prev`.
pub fn reoptimize(input: &LayoutInput, prev: &LayoutResult, pinned: &BTreeSet<String>, cfg: &LayoutConfig) -> Result<LayoutResult> {
    cfg.validate()?;
    place_and_optimize(input, prev.clone(), pinned, cfg)
}

fn place_and_optimize(input: &LayoutInput, mut result: LayoutResult, pinned: &BTreeSet<String>, cfg: &LayoutConfig) -> Result<LayoutResult> {
    let g = input.graph;
    let element_nodes = {
        let mut marks = vec![false; g.node_count()];
        for e in &input.elements {
            for &v in e {
                marks[v] = true;
            }
        }
        marks
    };
    let degrees: Vec<usize> = (0..g.node_count()).map(|v| g.degree(v)).collect();
    let node_radii: Vec<f64> = element_nodes.iter().map(|&e| if e { cfg.glyph_radius } else { cfg.node_radius }).collect();
    let items: Vec<Placeable> = input
        .annotations
        .iter()
        .map(|spec| {
            let sources: Vec<Point> = spec.targets.iter().map(|t| target_point(&result.nodes, t)).collect();
            let focus = centroid(sources.iter().copied());
            let anchor = result.pattern.anchors.get(spec.element).copied().unwrap_or(focus);
            let fixed = if pinned.contains(&spec.id) { result.rect(&spec.id).map(Rect::center) } else { None };
            Placeable { id: spec.id.clone(), width: spec.width, height: spec.height, sources, focus, anchor, pinned: fixed }
        })
        .collect();
    let problem = PlacementProblem {
        nodes: result.nodes.clone(),
        node_radii: node_radii.clone(),
        importance: placement::importance(&degrees, &element_nodes),
        items,
        bounds: cfg.annotation_region,
        weights: cfg.weights,
        radius: cfg.search_radius,
    };
    let placed = place_annotations(&problem, &cfg.harmony, cfg.seed.wrapping_add(1))?;
    let rects = problem.rects(&placed.centers);
    let fixed: Vec<bool> = problem.items.iter().map(|it| it.pinned.is_some()).collect();
    let discs: Vec<(Point, f64)> = result.nodes.iter().copied().zip(node_radii).collect();
    let opt = optimize_positions(&rects, &fixed, &discs, &cfg.annotation_region, cfg.margin);
    let centers: Vec<Point> = opt.rects.iter().map(Rect::center).collect();

    result.quality = problem.quality(&centers);
    result.annotations =
        input.annotations.iter().zip(&opt.rects).map(|(s, &rect)| PlacedAnnotation { id: s.id.clone(), rect }).collect();
    result.residual_overlaps = opt.residual;
    result.relink(&input.annotations);
    Ok(result)
}
