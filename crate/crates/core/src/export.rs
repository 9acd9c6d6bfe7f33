//! JSON export records. Field order is fixed by declaration order so the
//! documents diff cleanly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::facts::{Filter, GraphFact};
use crate::graph::{Component, Graph};
use crate::layout::{LayoutResult, Point, Quality, VifKind};
use crate::organize::{linearize, Logical, Narrative, Rewards, Topological};
use crate::render::{Chart, Poster};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactRecord {
    pub id: String,
    #[serde(rename = "type")]
    pub fact_type: String,
    pub subgraph: Vec<Filter>,
    pub partition: String,
    pub measure: String,
    /// Node ids, or `community:K` with the member ids.
    pub focus: Vec<FocusRecord>,
    pub impact: f64,
    pub interestingness: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FocusRecord {
    Node(String),
    Community { community: usize, members: Vec<String> },
}

pub fn focus_record(g: &Graph, c: &Component) -> FocusRecord {
    match c {
        Component::Node(v) => FocusRecord::Node(g.id(*v).to_string()),
        Component::Community { id, members } => {
            FocusRecord::Community { community: *id, members: members.iter().map(|&v| g.id(v).to_string()).collect() }
        }
    }
}

pub fn fact_record(g: &Graph, f: &GraphFact) -> FactRecord {
    FactRecord {
        id: f.id.clone(),
        fact_type: f.fact_type.to_string(),
        subgraph: f.subgraph.clone(),
        partition: f.partition.to_string(),
        measure: f.measure.to_string(),
        focus: f.focus.iter().map(|c| focus_record(g, c)).collect(),
        impact: f.impact,
        interestingness: f.interestingness,
        score: f.score,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub pred: String,
    pub succ: String,
    pub logical: Logical,
    pub topological: Topological,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrativeRecord {
    pub topic: String,
    pub variant: String,
    pub facts: Vec<FactRecord>,
    pub relations: Vec<RelationRecord>,
    pub rewards: Rewards,
    pub seed: u64,
}

pub fn narrative_record(g: &Graph, n: &Narrative) -> NarrativeRecord {
    let order = if n.order.len() == n.facts.len() { n.order.clone() } else { linearize(n) };
    NarrativeRecord {
        topic: n.topic.slug().to_string(),
        variant: n.variant.clone(),
        facts: order.iter().filter_map(|id| n.fact(id)).map(|f| fact_record(g, f)).collect(),
        relations: n
            .relations
            .iter()
            .map(|r| RelationRecord {
                pred: r.predecessor.clone(),
                succ: r.successor.clone(),
                logical: r.logical,
                topological: r.topological,
                cost: r.cost,
            })
            .collect(),
        rewards: n.rewards,
        seed: n.seed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectRecord {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderRecord {
    pub from: Point,
    pub to: Point,
    pub annotation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutRecord {
    pub pattern: VifKind,
    pub nodes: BTreeMap<String, Point>,
    pub annotations: BTreeMap<String, RectRecord>,
    pub leaders: Vec<LeaderRecord>,
    pub quality: Quality,
}

pub fn layout_record(g: &Graph, l: &LayoutResult) -> LayoutRecord {
    LayoutRecord {
        pattern: l.pattern.kind,
        nodes: l.nodes.iter().enumerate().map(|(v, &p)| (g.id(v).to_string(), p)).collect(),
        annotations: l
            .annotations
            .iter()
            .map(|a| (a.id.clone(), RectRecord { cx: a.rect.cx, cy: a.rect.cy, w: a.rect.w, h: a.rect.h }))
            .collect(),
        leaders: l.leaders.iter().map(|x| LeaderRecord { from: x.from, to: x.to, annotation: x.annotation.clone() }).collect(),
        quality: l.quality,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    pub facts: Vec<String>,
    pub text: String,
    /// Untruncated text when the box cut it.
    pub full_text: String,
    pub font_size: f64,
    pub chart: Option<Chart>,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryChartRecord {
    pub fact: String,
    pub caption: String,
    pub chart: Chart,
}

/// Everything a client needs to redraw the poster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Export {
    pub title: String,
    pub summary: String,
    pub narrative: NarrativeRecord,
    pub layout: LayoutRecord,
    pub annotations: Vec<AnnotationRecord>,
    pub graph_summary: Vec<SummaryChartRecord>,
    pub legend: Vec<String>,
    pub width: f64,
    pub height: f64,
}

pub fn export(g: &Graph, n: &Narrative, layout: &LayoutResult, p: &Poster) -> Export {
    Export {
        title: p.title.clone(),
        summary: p.summary.clone(),
        narrative: narrative_record(g, n),
        layout: layout_record(g, layout),
        annotations: p
            .annotations
            .iter()
            .map(|a| AnnotationRecord {
                id: a.id.clone(),
                facts: a.facts.clone(),
                text: a.text.clone(),
                full_text: a.full_text.clone(),
                font_size: a.font_size,
                chart: a.chart.clone(),
                color: a.color.clone(),
            })
            .collect(),
        graph_summary: p
            .graph_summary
            .iter()
            .map(|c| SummaryChartRecord { fact: c.fact.clone(), caption: c.caption.clone(), chart: c.chart.clone() })
            .collect(),
        legend: p.legend.iter().map(|e| e.label.clone()).collect(),
        width: p.width,
        height: p.height,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::FactType;
    use crate::graph::{Measure, PartitionMethod};

    #[test]
    fn fact_record_keeps_the_documented_field_order() {
        let g = Graph::from_edge_list("t", &["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let f = GraphFact {
            id: "abc".into(),
            fact_type: FactType::Extreme,
            subgraph: vec![Filter { field: "team".into(), value: "x".into() }],
            partition: PartitionMethod::None,
            measure: Measure::Degree,
            focus: vec![Component::Node(1), Component::Community { id: 0, members: vec![0, 2] }],
            impact: 0.5,
            interestingness: 0.25,
            score: 0.125,
            scope: vec![0, 1, 2],
            focus_values: vec![2.0],
            values: vec![1.0, 2.0, 1.0],
        };
        let json = serde_json::to_string(&fact_record(&g, &f)).unwrap();
        assert_eq!(
            json,
            r#"{"id":"abc","type":"Extreme","subgraph":[{"field":"team","value":"x"}],"partition":"none","measure":"degree","focus":["b",{"community":0,"members":["a","c"]}],"impact":0.5,"interestingness":0.25,"score":0.125}"#
        );
    }
}
