//! Poster assembly: annotations grouped by focus, glyphs, charts and the
//! SVG document.

mod svg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use svg::render_svg;

use crate::facts::{FactType, GraphFact};
use crate::graph::{Component, Graph, NodeIx, PartitionMethod};
use crate::layout::geometry::convex_hull;
use crate::layout::{AnnotationSpec, LayoutResult, Leader, Point, Rect};
use crate::organize::Narrative;
use crate::text::{component_name, format_percent};

pub const MAX_WIDTH: f64 = 280.0;
pub const MAX_HEIGHT: f64 = 160.0;
pub const MAX_FONT: f64 = 14.0;
pub const MIN_FONT: f64 = 10.0;
const PADDING: f64 = 8.0;
const CHAR_WIDTH: f64 = 0.56;
const LINE_HEIGHT: f64 = 1.25;
const HISTOGRAM_BINS: usize = 16;

pub const PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];
pub const NEUTRAL: &str = "#555555";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlyphKind {
    Star,
    WarningDiamond,
    Medallion,
    PieDot,
}

impl GlyphKind {
    pub fn for_fact(t: FactType) -> Option<Self> {
        match t {
            FactType::Extreme => Some(GlyphKind::Star),
            FactType::Outlier => Some(GlyphKind::WarningDiamond),
            FactType::Rank => Some(GlyphKind::Medallion),
            FactType::Proportion => Some(GlyphKind::PieDot),
            FactType::Distribution | FactType::Evenness => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GlyphKind::Star => "Extreme",
            GlyphKind::WarningDiamond => "Outlier",
            GlyphKind::Medallion => "Rank",
            GlyphKind::PieDot => "Proportion",
        }
    }
}

/// A node drawn as a glyph instead of a plain dot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Glyph {
    pub node: NodeIx,
    pub kind: GlyphKind,
    /// Position for Rank medallions, 1-based.
    pub rank: Option<usize>,
    pub fact: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Chart {
    Donut { share: f64, label: String },
    Bars { labels: Vec<String>, values: Vec<f64> },
    Histogram { min: f64, max: f64, counts: Vec<usize> },
    Strip { values: Vec<f64> },
}

impl Chart {
    /// Vertical space the chart takes inside an annotation.
    pub fn inline_height(&self) -> f64 {
        match self {
            Chart::Donut { .. } => 44.0,
            Chart::Bars { labels, .. } => 16.0 * labels.len() as f64,
            Chart::Histogram { .. } | Chart::Strip { .. } => 60.0,
        }
    }
}

/// An on-graph annotation: one or more facts sharing one focus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: String,
    pub facts: Vec<String>,
    pub targets: Vec<Component>,
    /// Index of the data element the annotation is drawn towards.
    pub element: usize,
    /// Text as displayed, possibly cut with an ellipsis.
    pub text: String,
    pub full_text: String,
    pub lines: Vec<String>,
    pub font_size: f64,
    pub chart: Option<Chart>,
    pub width: f64,
    pub height: f64,
    pub color: String,
    pub rect: Option<Rect>,
    pub leaders: Vec<Leader>,
}

/// Captioned chart of a Distribution or Evenness fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryChart {
    pub fact: String,
    pub caption: String,
    pub chart: Chart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendEntry {
    pub glyph: GlyphKind,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hull {
    pub id: String,
    pub members: Vec<NodeIx>,
    pub points: Vec<Point>,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneNode {
    pub id: String,
    pub position: Point,
    pub radius: f64,
    pub glyph: Option<Glyph>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub nodes: Vec<SceneNode>,
    pub edges: Vec<(NodeIx, NodeIx)>,
    pub hulls: Vec<Hull>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poster {
    pub title: String,
    pub summary: String,
    pub legend: Vec<LegendEntry>,
    pub scene: Scene,
    pub annotations: Vec<Annotation>,
    pub graph_summary: Vec<SummaryChart>,
    pub width: f64,
    pub height: f64,
}

/// Text block fitted into the annotation box.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedText {
    pub lines: Vec<String>,
    pub font_size: f64,
    pub width: f64,
    pub height: f64,
    pub truncated: bool,
}

fn text_width(s: &str, font: f64) -> f64 {
    s.chars().count() as f64 * font * CHAR_WIDTH
}

/// Greedy word wrap to `max_width`.
pub fn wrap(text: &str, font: f64, max_width: f64) -> Vec<String> {
    let mut lines = vec![];
    let mut line = String::new();
    for word in text.split_whitespace() {
        let candidate = if line.is_empty() { word.to_string() } else { format!("{line} {word}") };
        if text_width(&candidate, font) <= max_width || line.is_empty() {
            line = candidate;
        } else {
            lines.push(std::mem::take(&mut line));
            line = word.to_string();
        }
    }
    if !line.is_empty() {
        lines.push(line);
    }
    // Break words longer than the box.
    let max_chars = ((max_width / (font * CHAR_WIDTH)).floor() as usize).max(1);
    lines
        .into_iter()
        .flat_map(|l| {
            let chars: Vec<char> = l.chars().collect();
            if chars.len() <= max_chars {
                vec![l]
            } else {
                chars.chunks(max_chars).map(|c| c.iter().collect()).collect()
            }
        })
        .collect()
}

/// Measures `text` at 14pt, shrinking one point at a time down to 10pt to
/// fit the maximum box, and cuts it with an ellipsis when even 10pt does
/// not fit. `reserved` is extra height (a chart) below the text.
pub fn fit_text(text: &str, reserved: f64, min_width: f64) -> FittedText {
    fit_box(text, reserved, min_width, MAX_WIDTH, MAX_HEIGHT)
}

/// Like [`fit_text`] but into a box of fixed size, used when edited text
/// must keep an already placed rect.
pub fn fit_text_into(text: &str, reserved: f64, width: f64, height: f64) -> FittedText {
    let mut f = fit_box(text, reserved, width, width, height);
    f.width = width;
    f.height = height;
    f
}

fn fit_box(text: &str, reserved: f64, min_width: f64, max_w: f64, max_h: f64) -> FittedText {
    let inner_w = (max_w - 2.0 * PADDING).max(1.0);
    let mut font = MAX_FONT;
    loop {
        let lines = wrap(text, font, inner_w);
        let h = lines.len() as f64 * font * LINE_HEIGHT + reserved + 2.0 * PADDING;
        if h <= max_h || font <= MIN_FONT {
            let mut lines = lines;
            let truncated = h > max_h;
            if truncated {
                let room = ((max_h - reserved - 2.0 * PADDING) / (font * LINE_HEIGHT)).floor().max(1.0) as usize;
                lines.truncate(room);
                if let Some(last) = lines.last_mut() {
                    let max_chars = (inner_w / (font * CHAR_WIDTH)).floor() as usize;
                    let mut chars: Vec<char> = last.chars().collect();
                    chars.truncate(max_chars.saturating_sub(1));
                    while chars.last() == Some(&' ') {
                        chars.pop();
                    }
                    *last = chars.into_iter().collect::<String>() + "…";
                }
            }
            let widest = lines.iter().map(|l| text_width(l, font)).fold(0.0, f64::max);
            let width = (widest + 2.0 * PADDING).max(min_width).min(max_w);
            let height = (lines.len() as f64 * font * LINE_HEIGHT + reserved + 2.0 * PADDING).min(max_h);
            return FittedText { lines, font_size: font, width, height, truncated };
        }
        font -= 1.0;
    }
}

fn same_component(a: &Component, b: &Component) -> bool {
    a.vertices() == b.vertices() && matches!((a, b), (Component::Node(_), Component::Node(_)) | (Component::Community { .. }, Component::Community { .. }))
}

fn same_focus(a: &[Component], b: &[Component]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same_component(x, y))
}

/// Distinct focus components of the narrative in reading order.
pub fn data_elements(n: &Narrative) -> Vec<Component> {
    let mut out: Vec<Component> = vec![];
    for id in &n.order {
        let Some(f) = n.fact(id) else { continue };
        for c in &f.focus {
            if !out.iter().any(|e| same_component(e, c)) {
                out.push(c.clone());
            }
        }
    }
    out
}

fn histogram(values: &[f64]) -> Chart {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0; HISTOGRAM_BINS];
    if values.is_empty() {
        return Chart::Histogram { min: 0.0, max: 0.0, counts };
    }
    let span = max - min;
    for &v in values {
        let b = if span > 0.0 { (((v - min) / span) * HISTOGRAM_BINS as f64) as usize } else { 0 };
        counts[b.min(HISTOGRAM_BINS - 1)] += 1;
    }
    Chart::Histogram { min, max, counts }
}

/// Chart attached to a fact, if its type carries one.
pub fn chart_for(f: &GraphFact, g: &Graph) -> Option<Chart> {
    match f.fact_type {
        FactType::Proportion => {
            let share = f.share().unwrap_or(0.0);
            Some(Chart::Donut { share, label: format_percent(share) })
        }
        FactType::Rank => Some(Chart::Bars {
            labels: f.focus.iter().map(|c| short_name(g, c, &f.partition)).collect(),
            values: f.focus_values.clone(),
        }),
        FactType::Distribution => Some(histogram(&f.values)),
        FactType::Evenness => {
            let mut values = f.values.clone();
            values.sort_by(|a, b| b.total_cmp(a));
            Some(Chart::Strip { values })
        }
        FactType::Extreme | FactType::Outlier => None,
    }
}

fn short_name(g: &Graph, c: &Component, p: &PartitionMethod) -> String {
    match c {
        Component::Node(v) => g.id(*v).to_string(),
        _ => component_name(g, c, p).replace("the community containing ", "with ").replace("the ", ""),
    }
}

/// Colour of the community with exactly these members, if it is drawn.
fn color_of(members: &[NodeIx], communities: &[Vec<NodeIx>]) -> Option<&'static str> {
    communities.iter().position(|c| c == members).map(|i| PALETTE[i % PALETTE.len()])
}

/// Groups the narrative's facts by identical focus into annotations,
/// routes Distribution/Evenness facts to the graph summary and records
/// glyph substitutions for node foci. `texts` maps fact id to its sentence.
pub fn build_annotations(
    n: &Narrative,
    g: &Graph,
    texts: &BTreeMap<String, String>,
    communities: &[Vec<NodeIx>],
) -> (Vec<Annotation>, Vec<SummaryChart>, Vec<Glyph>) {
    let elements = data_elements(n);
    let mut groups: Vec<Vec<&GraphFact>> = vec![];
    let mut summary = vec![];
    let mut glyphs: Vec<Glyph> = vec![];
    for id in &n.order {
        let Some(f) = n.fact(id) else { continue };
        let text = texts.get(id).cloned().unwrap_or_default();
        if !f.fact_type.has_focus() || f.focus.is_empty() {
            if let Some(chart) = chart_for(f, g) {
                summary.push(SummaryChart { fact: f.id.clone(), caption: text, chart });
            }
            continue;
        }
        match groups.iter_mut().find(|gr| same_focus(&gr[0].focus, &f.focus)) {
            Some(gr) => gr.push(f),
            None => groups.push(vec![f]),
        }
        if let Some(kind) = GlyphKind::for_fact(f.fact_type) {
            for (i, c) in f.focus.iter().enumerate() {
                if let Component::Node(v) = c {
                    if !glyphs.iter().any(|gl| gl.node == *v) {
                        let rank = (f.fact_type == FactType::Rank).then_some(i + 1);
                        glyphs.push(Glyph { node: *v, kind, rank, fact: f.id.clone() });
                    }
                }
            }
        }
    }

    let annotations = groups
        .into_iter()
        .map(|gr| {
            let full_text = gr.iter().map(|f| texts.get(&f.id).cloned().unwrap_or_default()).collect::<Vec<_>>().join(" ");
            let chart = gr.iter().find_map(|f| if matches!(f.fact_type, FactType::Rank | FactType::Proportion) { chart_for(f, g) } else { None });
            let reserved = chart.as_ref().map(|c| c.inline_height() + 6.0).unwrap_or(0.0);
            let min_width = if chart.is_some() { 140.0 } else { 60.0 };
            let fitted = fit_text(&full_text, reserved, min_width);
            let targets = gr[0].focus.clone();
            let element = elements.iter().position(|e| same_component(e, &targets[0])).unwrap_or(0);
            let color = match &targets[0] {
                Component::Community { members, .. } if targets.len() == 1 => color_of(members, communities).unwrap_or(NEUTRAL),
                _ => NEUTRAL,
            };
            Annotation {
                id: format!("ann-{}", gr[0].id),
                facts: gr.iter().map(|f| f.id.clone()).collect(),
                targets,
                element,
                text: fitted.lines.join(" "),
                full_text,
                lines: fitted.lines,
                font_size: fitted.font_size,
                chart,
                width: fitted.width,
                height: fitted.height,
                color: color.to_string(),
                rect: None,
                leaders: vec![],
            }
        })
        .collect();
    (annotations, summary, glyphs)
}

/// Layout inputs for the annotations: size, leader targets and element.
pub fn annotation_specs(annotations: &[Annotation]) -> Vec<AnnotationSpec> {
    annotations
        .iter()
        .map(|a| AnnotationSpec {
            id: a.id.clone(),
            width: a.width,
            height: a.height,
            targets: a.targets.iter().map(|c| c.vertices().to_vec()).collect(),
            element: a.element,
        })
        .collect()
}

/// Assembles the poster from laid-out annotations and node positions.
#[allow(clippy::too_many_arguments)]
pub fn assemble_poster(
    title: String,
    summary: String,
    g: &Graph,
    mut annotations: Vec<Annotation>,
    graph_summary: Vec<SummaryChart>,
    glyphs: Vec<Glyph>,
    communities: &[Vec<NodeIx>],
    layout: &LayoutResult,
    node_radius: f64,
    glyph_radius: f64,
    canvas: (f64, f64),
) -> Poster {
    for a in &mut annotations {
        a.rect = layout.rect(&a.id).copied();
        if let Some(r) = a.rect {
            if (r.w - a.width).abs() > 1e-9 || (r.h - a.height).abs() > 1e-9 {
                let reserved = a.chart.as_ref().map(|c| c.inline_height() + 6.0).unwrap_or(0.0);
                let f = fit_text_into(&a.full_text, reserved, r.w, r.h);
                a.text = f.lines.join(" ");
                a.lines = f.lines;
                a.font_size = f.font_size;
                a.width = r.w;
                a.height = r.h;
            }
        }
        a.leaders = layout.leaders.iter().filter(|l| l.annotation == a.id).cloned().collect();
    }
    let nodes = (0..g.node_count())
        .map(|v| {
            let glyph = glyphs.iter().find(|gl| gl.node == v).cloned();
            SceneNode {
                id: g.id(v).to_string(),
                position: layout.nodes[v],
                radius: if glyph.is_some() { glyph_radius } else { node_radius },
                glyph,
            }
        })
        .collect();
    let hulls = communities
        .iter()
        .enumerate()
        .map(|(i, members)| Hull {
            id: format!("hull-{i}"),
            members: members.clone(),
            points: convex_hull(&members.iter().map(|&v| layout.nodes[v]).collect::<Vec<_>>()),
            color: PALETTE[i % PALETTE.len()].to_string(),
        })
        .collect();
    let mut kinds: Vec<GlyphKind> = glyphs.iter().map(|gl| gl.kind).collect();
    kinds.sort();
    kinds.dedup();
    Poster {
        title,
        summary,
        legend: kinds.into_iter().map(|k| LegendEntry { glyph: k, label: k.label().to_string() }).collect(),
        scene: Scene { nodes, edges: g.edges().iter().map(|e| (e.source, e.target)).collect(), hulls },
        annotations,
        graph_summary,
        width: canvas.0,
        height: canvas.1,
    }
}
