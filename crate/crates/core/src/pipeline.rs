//! The end-to-end generation pipeline and the edits applied to a
//! generated story.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facts::{enumerate_facts, DiscoveryConfig, GraphFact};
use crate::graph::{partition, Graph, NodeIx, PartitionMethod};
use crate::layout::geometry::{add, centroid, sub};
use crate::layout::{compute_layout, reoptimize, LayoutConfig, LayoutInput, LayoutResult, Point, Rect};
use crate::organize::{organize, BanditState, Narrative, OrganizeConfig, Topic};
use crate::render::{annotation_specs, assemble_poster, build_annotations, data_elements, Annotation, Poster};
use crate::text::{annotation_text, summary_text, Templates};

/// Every tunable of a generation run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub discovery: DiscoveryConfig,
    pub organize: OrganizeConfig,
    pub layout: LayoutConfig,
    /// Template file replacing the built-in sentence templates.
    pub templates: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.discovery.validate()?;
        self.organize.expansion.validate()?;
        self.layout.validate()
    }

    pub fn load_templates(&self) -> Result<Templates> {
        match &self.templates {
            Some(p) => Templates::load(p),
            None => Ok(Templates::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    /// `None` lets the bandit choose among every feasible topic.
    pub topic: Option<Topic>,
    pub partition: PartitionMethod,
    pub seed: u64,
}

impl Default for GenerateRequest {
    fn default() -> Self {
        Self { topic: None, partition: PartitionMethod::GreedyModularity, seed: 0 }
    }
}

/// Cooperative cancellation, checked between pipeline stages.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }

    fn check(&self) -> Result<()> {
        if self.is_cancelled() {
            Err(Error::Cancelled)
        } else {
            Ok(())
        }
    }
}

/// A generated narrative with its layout and the author's edits. The
/// poster is a pure function of the story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Story {
    pub request: GenerateRequest,
    pub narrative: Narrative,
    pub bandit: Option<BanditState>,
    /// Sentences replaced by the author, by fact id.
    pub overrides: BTreeMap<String, String>,
    pub layout: LayoutResult,
    /// Annotation ids kept in place by re-optimization.
    pub pinned: BTreeSet<String>,
}

/// One drag of a node, community or annotation. Either an absolute target
/// (`to`) or a displacement (`by`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub element: String,
    #[serde(default)]
    pub to: Option<Point>,
    #[serde(default)]
    pub by: Option<Point>,
}

fn seeded(cfg: &PipelineConfig, req: &GenerateRequest) -> PipelineConfig {
    let mut cfg = cfg.clone();
    cfg.discovery.seed = req.seed;
    cfg.organize.seed = req.seed;
    cfg.organize.tie_partition = match &req.partition {
        PartitionMethod::None => cfg.organize.tie_partition,
        p => p.clone(),
    };
    cfg.layout.seed = req.seed;
    cfg
}

/// Fact discovery for a request.
pub fn discover(g: &Graph, cfg: &PipelineConfig, seed: u64) -> Result<Vec<GraphFact>> {
    let mut d = cfg.discovery.clone();
    d.seed = seed;
    enumerate_facts(g, &d)
}

/// Communities drawn as hulls; none when the method does not apply.
pub fn communities(g: &Graph, method: &PartitionMethod) -> Vec<Vec<NodeIx>> {
    if !method.is_community_level() {
        return vec![];
    }
    match partition(g, &g.all_nodes(), method) {
        Ok(p) => p.communities.into_iter().map(|c| c.members).collect(),
        Err(_) => vec![],
    }
}

/// Sentence per narrative fact, honouring overrides.
pub fn fact_texts(n: &Narrative, g: &Graph, templates: &Templates, overrides: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    n.facts
        .iter()
        .map(|f| (f.id.clone(), overrides.get(&f.id).cloned().unwrap_or_else(|| annotation_text(f, g, templates))))
        .collect()
}

fn annotations_for(g: &Graph, story_narrative: &Narrative, overrides: &BTreeMap<String, String>, hulls: &[Vec<NodeIx>], templates: &Templates) -> Vec<Annotation> {
    let texts = fact_texts(story_narrative, g, templates, overrides);
    build_annotations(story_narrative, g, &texts, hulls).0
}

fn layout_input<'a>(g: &'a Graph, n: &Narrative, hulls: Vec<Vec<NodeIx>>, annotations: &[Annotation]) -> LayoutInput<'a> {
    LayoutInput {
        graph: g,
        communities: hulls,
        elements: data_elements(n).iter().map(|c| c.vertices().to_vec()).collect(),
        annotations: annotation_specs(annotations),
    }
}

/// Full layout of a narrative.
pub fn lay_out(
    g: &Graph,
    n: &Narrative,
    overrides: &BTreeMap<String, String>,
    method: &PartitionMethod,
    cfg: &LayoutConfig,
    templates: &Templates,
) -> Result<LayoutResult> {
    let hulls = communities(g, method);
    let anns = annotations_for(g, n, overrides, &hulls, templates);
    let input = layout_input(g, n, hulls, &anns);
    compute_layout(&input, cfg)
}

/// Discovery, organization and layout.
pub fn generate(g: &Graph, req: &GenerateRequest, cfg: &PipelineConfig, templates: &Templates, cancel: &CancelToken) -> Result<Story> {
    let cfg = seeded(cfg, req);
    cfg.validate()?;
    cancel.check()?;
    let pool = enumerate_facts(g, &cfg.discovery)?;
    cancel.check()?;
    generate_from_pool(g, &pool, req, &cfg, templates, cancel)
}

/// Organization and layout on an already discovered pool.
pub fn generate_from_pool(
    g: &Graph,
    pool: &[GraphFact],
    req: &GenerateRequest,
    cfg: &PipelineConfig,
    templates: &Templates,
    cancel: &CancelToken,
) -> Result<Story> {
    let cfg = seeded(cfg, req);
    let (narrative, bandit) = organize(g, pool, req.topic, &cfg.discovery, &cfg.organize)?;
    cancel.check()?;
    let overrides = BTreeMap::new();
    let layout = lay_out(g, &narrative, &overrides, &req.partition, &cfg.layout, templates)?;
    cancel.check()?;
    Ok(Story { request: req.clone(), narrative, bandit: Some(bandit), overrides, layout, pinned: BTreeSet::new() })
}

/// Poster title: topic title and graph name.
pub fn title(n: &Narrative, g: &Graph) -> String {
    if g.name.is_empty() {
        n.topic.title().to_string()
    } else {
        format!("{}: {}", n.topic.title(), g.name)
    }
}

/// Assembles the poster of a story.
pub fn poster(g: &Graph, story: &Story, cfg: &PipelineConfig, templates: &Templates) -> Poster {
    let hulls = communities(g, &story.request.partition);
    let texts = fact_texts(&story.narrative, g, templates, &story.overrides);
    let (anns, summary_charts, glyphs) = build_annotations(&story.narrative, g, &texts, &hulls);
    let summary = summary_text(&story.narrative, g, templates, &story.overrides);
    assemble_poster(
        title(&story.narrative, g),
        summary,
        g,
        anns,
        summary_charts,
        glyphs,
        &hulls,
        &story.layout,
        cfg.layout.node_radius,
        cfg.layout.glyph_radius,
        (cfg.layout.canvas_width, cfg.layout.canvas_height),
    )
}

/// Recomputes the layout after the narrative changed.
pub fn relayout(g: &Graph, story: &mut Story, cfg: &PipelineConfig, templates: &Templates) -> Result<()> {
    let cfg = seeded(cfg, &story.request);
    story.layout = lay_out(g, &story.narrative, &story.overrides, &story.request.partition, &cfg.layout, templates)?;
    story.pinned.clear();
    Ok(())
}

/// Annotation placement again on the current node positions, keeping
/// pinned annotations where they are.
pub fn reoptimize_story(g: &Graph, story: &mut Story, cfg: &PipelineConfig, templates: &Templates) -> Result<()> {
    let cfg = seeded(cfg, &story.request);
    let hulls = communities(g, &story.request.partition);
    let anns = annotations_for(g, &story.narrative, &story.overrides, &hulls, templates);
    let input = layout_input(g, &story.narrative, hulls, &anns);
    story.layout = reoptimize(&input, &story.layout, &story.pinned, &cfg.layout)?;
    Ok(())
}

fn target(current: Point, m: &Move) -> Result<Point> {
    match (m.to, m.by) {
        (Some(p), _) => Ok(p),
        (None, Some(d)) => Ok(add(current, d)),
        (None, None) => Err(Error::Config(format!("move of '{}' has neither 'to' nor 'by'", m.element))),
    }
}

/// Applies drags and pins the moved annotations. Node moves are rigid
/// translations of the node (or every member of a community); annotation
/// moves change only the rect. Leaders are recomputed from the result.
pub fn apply_moves(g: &Graph, story: &mut Story, moves: &[Move], templates: &Templates) -> Result<()> {
    let hulls = communities(g, &story.request.partition);
    let mut layout = story.layout.clone();
    let mut pinned = story.pinned.clone();
    for m in moves {
        let e = m.element.as_str();
        if let Some(id) = e.strip_prefix("node:") {
            let v = g.lookup(id).ok_or_else(|| Error::UnknownElement(e.to_string()))?;
            layout.nodes[v] = target(layout.nodes[v], m)?;
        } else if let Some(k) = e.strip_prefix("community:") {
            let members = k.parse::<usize>().ok().and_then(|k| hulls.get(k)).ok_or_else(|| Error::UnknownElement(e.to_string()))?;
            let c = centroid(members.iter().map(|&v| layout.nodes[v]));
            let d = sub(target(c, m)?, c);
            for &v in members {
                layout.nodes[v] = add(layout.nodes[v], d);
            }
        } else {
            let id = e.strip_prefix("annotation:").unwrap_or(e);
            let placed = layout.annotations.iter_mut().find(|a| a.id == id).ok_or_else(|| Error::UnknownElement(e.to_string()))?;
            let to = target(placed.rect.center(), m)?;
            placed.rect = Rect::new(to, placed.rect.w, placed.rect.h);
            pinned.insert(id.to_string());
        }
    }
    let anns = annotations_for(g, &story.narrative, &story.overrides, &hulls, templates);
    let mut specs = annotation_specs(&anns);
    // Leaders follow the placed rects, which may differ in size from a fresh
    // measurement after text edits.
    for s in &mut specs {
        if let Some(r) = layout.rect(&s.id) {
            s.width = r.w;
            s.height = r.h;
        }
    }
    layout.relink(&specs);
    story.layout = layout;
    story.pinned = pinned;
    Ok(())
}

/// Case-insensitive substring search over node ids, ranked by match
/// position then id.
pub fn search_node(g: &Graph, query: &str) -> Vec<String> {
    if query.is_empty() {
        return vec![];
    }
    let q = query.to_lowercase();
    let mut hits: Vec<(usize, &str)> =
        (0..g.node_count()).filter_map(|v| g.id(v).to_lowercase().find(&q).map(|pos| (pos, g.id(v)))).collect();
    hits.sort();
    hits.into_iter().map(|(_, id)| id.to_string()).collect()
}
