//! Whole-pipeline checks on Les Misérables: SVG validity and geometry,
//! annotation routing, edits and the frozen narrative snapshot.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use calliope_core::export::{export, narrative_record};
use calliope_core::facts::FactType;
use calliope_core::graph::{parse_graph, Graph, PartitionMethod};
use calliope_core::layout::Rect;
use calliope_core::organize::Topic;
use calliope_core::pipeline::{
    apply_moves, communities, generate, poster, reoptimize_story, CancelToken, GenerateRequest, Move, PipelineConfig,
    Story,
};
use calliope_core::render::{render_svg, GlyphKind, Poster};
use calliope_core::text::Templates;

fn lesmis() -> Graph {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/lesmis.json")).unwrap();
    parse_graph(&text).unwrap()
}

fn request() -> GenerateRequest {
    GenerateRequest { topic: Some(Topic::RevealingHiddenTies), partition: PartitionMethod::GreedyModularity, seed: 7 }
}

fn generated() -> &'static (Graph, Story) {
    static CELL: OnceLock<(Graph, Story)> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = lesmis();
        let story = generate(&g, &request(), &PipelineConfig::default(), &Templates::default(), &CancelToken::default()).unwrap();
        (g, story)
    })
}

fn render(g: &Graph, story: &Story) -> Poster {
    poster(g, story, &PipelineConfig::default(), &Templates::default())
}

fn on_border(r: &Rect, p: [f64; 2]) -> bool {
    let [x0, y0] = r.min();
    let [x1, y1] = r.max();
    let inside = p[0] >= x0 - 1e-6 && p[0] <= x1 + 1e-6 && p[1] >= y0 - 1e-6 && p[1] <= y1 + 1e-6;
    let edge = [(p[0] - x0).abs(), (p[0] - x1).abs(), (p[1] - y0).abs(), (p[1] - y1).abs()].iter().any(|d| *d < 1e-6);
    inside && edge
}

#[test]
fn svg_is_valid_and_leaders_end_on_rect_borders() {
    let (g, story) = generated();
    let p = render(g, story);
    let svg = render_svg(&p);
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let ids: Vec<&str> = doc.descendants().filter_map(|n| n.attribute("id")).collect();
    let unique: BTreeSet<&str> = ids.iter().copied().collect();
    assert_eq!(ids.len(), unique.len(), "element ids are unique");

    assert!(!p.annotations.is_empty());
    for a in &p.annotations {
        let r = a.rect.expect("placed");
        assert!(r.min()[0] >= 0.0 && r.min()[1] >= 0.0 && r.max()[0] <= p.width && r.max()[1] <= p.height);
        assert!(!a.leaders.is_empty());
        for (k, l) in a.leaders.iter().enumerate() {
            assert!(on_border(&r, l.to), "{} leader {k} ends off its rect", a.id);
            // The emitted coordinates are the rounded ones.
            let line = doc.descendants().find(|n| n.attribute("id") == Some(&format!("leader-{}-{k}", a.id))).unwrap();
            let x2: f64 = line.attribute("x2").unwrap().parse().unwrap();
            let y2: f64 = line.attribute("y2").unwrap().parse().unwrap();
            assert!((x2 - l.to[0]).abs() <= 0.005 && (y2 - l.to[1]).abs() <= 0.005);
        }
        // Leader sources sit inside the focus geometry.
        for (t, l) in a.targets.iter().zip(&a.leaders) {
            let pts: Vec<[f64; 2]> = t.vertices().iter().map(|&v| story.layout.nodes[v]).collect();
            let lo = pts.iter().fold([f64::INFINITY; 2], |m, p| [m[0].min(p[0]), m[1].min(p[1])]);
            let hi = pts.iter().fold([f64::NEG_INFINITY; 2], |m, p| [m[0].max(p[0]), m[1].max(p[1])]);
            assert!(l.from[0] >= lo[0] - 1e-9 && l.from[0] <= hi[0] + 1e-9 && l.from[1] >= lo[1] - 1e-9 && l.from[1] <= hi[1] + 1e-9);
        }
    }
    assert_eq!(story.layout.residual_overlaps, 0);
}

#[test]
fn rendering_twice_is_byte_identical() {
    let (g, story) = generated();
    assert_eq!(render_svg(&render(g, story)), render_svg(&render(g, story)));
    let again = generate(g, &request(), &PipelineConfig::default(), &Templates::default(), &CancelToken::default()).unwrap();
    assert_eq!(&again, story);
}

#[test]
fn routing_of_facts_into_annotations_charts_and_glyphs() {
    let (g, story) = generated();
    let p = render(g, story);
    let n = &story.narrative;
    for a in &p.annotations {
        let facts: Vec<_> = a.facts.iter().map(|id| n.fact(id).unwrap()).collect();
        assert!(facts.iter().all(|f| f.focus == facts[0].focus), "merged facts share a focus");
        assert!(facts.iter().all(|f| !matches!(f.fact_type, FactType::Distribution | FactType::Evenness)));
        let charted = facts.iter().any(|f| matches!(f.fact_type, FactType::Rank | FactType::Proportion));
        assert_eq!(a.chart.is_some(), charted);
        if facts[0].fact_type == FactType::Rank {
            assert_eq!(a.leaders.len(), facts[0].focus.len());
        }
    }
    for f in &n.facts {
        let summary = p.graph_summary.iter().any(|c| c.fact == f.id);
        let annotated = p.annotations.iter().any(|a| a.facts.contains(&f.id));
        if matches!(f.fact_type, FactType::Distribution | FactType::Evenness) {
            assert!(summary && !annotated);
        } else {
            assert!(annotated && !summary);
        }
    }
    let used: BTreeSet<GlyphKind> = p.scene.nodes.iter().filter_map(|s| s.glyph.as_ref().map(|gl| gl.kind)).collect();
    let legend: BTreeSet<GlyphKind> = p.legend.iter().map(|e| e.glyph).collect();
    assert_eq!(used, legend);
}

#[test]
fn editing_text_changes_only_text() {
    let (g, story) = generated();
    let mut edited = story.clone();
    let id = edited.narrative.order[0].clone();
    edited.overrides.insert(id.clone(), "A short replacement sentence.".into());
    let before = export(g, &story.narrative, &story.layout, &render(g, story));
    let after = export(g, &edited.narrative, &edited.layout, &render(g, &edited));
    assert_eq!(before.layout, after.layout);
    assert_eq!(before.narrative, after.narrative);
    assert_ne!(before.summary, after.summary);
    let changed: Vec<_> = before.annotations.iter().zip(&after.annotations).filter(|(a, b)| a != b).collect();
    assert!(changed.len() <= 1);
    for (a, b) in changed {
        assert_eq!((&a.id, &a.facts, &a.chart, &a.color), (&b.id, &b.facts, &b.chart, &b.color));
    }
}

#[test]
fn moves_follow_the_pin_contract() {
    let (g, story) = generated();
    let templates = Templates::default();
    let ann = story.layout.annotations[0].clone();

    let mut moved = story.clone();
    apply_moves(g, &mut moved, &[Move { element: ann.id.clone(), to: None, by: Some([12.0, -7.0]) }], &templates).unwrap();
    let r = *moved.layout.rect(&ann.id).unwrap();
    assert_eq!([r.cx, r.cy], [ann.rect.cx + 12.0, ann.rect.cy - 7.0]);
    assert_eq!(moved.layout.nodes, story.layout.nodes);
    for (a, b) in story.layout.annotations.iter().zip(&moved.layout.annotations) {
        if a.id != ann.id {
            assert_eq!(a, b);
        }
    }
    for (a, b) in story.layout.leaders.iter().zip(&moved.layout.leaders) {
        if a.annotation != ann.id {
            assert_eq!(a, b);
        }
    }

    // Re-optimization keeps the pinned annotation in place.
    reoptimize_story(g, &mut moved, &PipelineConfig::default(), &templates).unwrap();
    assert_eq!(moved.layout.rect(&ann.id).unwrap(), &r);

    let members = communities(g, &story.request.partition).remove(0);
    let mut shifted = story.clone();
    apply_moves(g, &mut shifted, &[Move { element: "community:0".into(), to: None, by: Some([5.0, 3.0]) }], &templates).unwrap();
    for v in 0..g.node_count() {
        let d = [shifted.layout.nodes[v][0] - story.layout.nodes[v][0], shifted.layout.nodes[v][1] - story.layout.nodes[v][1]];
        if members.contains(&v) {
            assert!((d[0] - 5.0).abs() < 1e-9 && (d[1] - 3.0).abs() < 1e-9);
        } else {
            assert_eq!(d, [0.0, 0.0]);
        }
    }
    let bad = apply_moves(g, &mut shifted, &[Move { element: "node:Nobody".into(), to: Some([0.0, 0.0]), by: None }], &templates);
    assert!(bad.is_err());
}

#[test]
fn empty_narrative_gives_a_bare_poster() {
    let (g, story) = generated();
    let mut bare = story.clone();
    let root = bare.narrative.facts[0].clone();
    bare.narrative.facts.truncate(1);
    bare.narrative.relations.clear();
    bare.narrative.order = vec![];
    let p = render(g, &bare);
    assert!(p.annotations.is_empty() && p.graph_summary.is_empty());
    assert!(p.summary.starts_with("The network"));
    assert!(p.summary.contains("77 nodes and 254 edges"));
    let svg = render_svg(&p);
    roxmltree::Document::parse(&svg).unwrap();
    assert!(!svg.contains(&root.id));
}

#[test]
fn hidden_ties_narrative_matches_snapshot() {
    let (g, story) = generated();
    let json = serde_json::to_string_pretty(&narrative_record(g, &story.narrative)).unwrap() + "\n";
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/lesmis_hidden_ties.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, &json).unwrap();
    }
    let golden = std::fs::read_to_string(path).expect("golden snapshot present");
    assert_eq!(json, golden);
}
