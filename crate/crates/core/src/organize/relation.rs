use std::fmt;

use serde::{Deserialize, Serialize};

use super::ExpansionConfig;
use crate::facts::{FactType, GraphFact};
use crate::graph::{Component, Graph, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Logical {
    Similarity,
    Contrast,
    Elaboration,
    Generalization,
    None,
}

impl fmt::Display for Logical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topological {
    SameFocus,
    ConnectedFocus,
    Unconnected,
}

/// Directed link from a fact already in the narrative to the fact it
/// introduces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub predecessor: String,
    pub successor: String,
    pub logical: Logical,
    pub topological: Topological,
    pub cost: f64,
}

impl Relation {
    pub fn between(fp: &GraphFact, fs: &GraphFact, g: &Graph, cfg: &ExpansionConfig) -> Self {
        let (logical, topological) = classify_relation(fp, fs, g);
        Relation {
            predecessor: fp.id.clone(),
            successor: fs.id.clone(),
            logical,
            topological,
            cost: relation_cost(logical, topological, cfg),
        }
    }

    pub fn is_related(&self) -> bool {
        self.logical != Logical::None || self.topological != Topological::Unconnected
    }
}

fn same_component(a: &Component, b: &Component) -> bool {
    match (a, b) {
        (Component::Node(x), Component::Node(y)) => x == y,
        (Component::Community { members: x, .. }, Component::Community { members: y, .. }) => x == y,
        _ => false,
    }
}

fn same_focus(a: &GraphFact, b: &GraphFact) -> bool {
    if a.focus.is_empty() && b.focus.is_empty() {
        return a.subgraph == b.subgraph && a.partition == b.partition;
    }
    a.focus.len() == b.focus.len()
        && a.focus.iter().all(|x| b.focus.iter().any(|y| same_component(x, y)))
}

/// Every focus component of `inner` appears in `outer`'s focus.
fn focus_within(inner: &GraphFact, outer: &GraphFact) -> bool {
    !inner.focus.is_empty() && inner.focus.iter().all(|x| outer.focus.iter().any(|y| same_component(x, y)))
}

fn strict_subset(small: &[usize], big: &[usize]) -> bool {
    small.len() < big.len() && small.iter().all(|v| big.binary_search(v).is_ok())
}

/// One of the elaboration cases leads from `a` to `b`: a whole-to-part
/// subgraph zoom on the same measure, a community to one of its member
/// nodes, or an Extreme/Rank to a Proportion on a shared focus.
fn elaboration_case(a: &GraphFact, b: &GraphFact) -> bool {
    let zoom = a.measure == b.measure && strict_subset(&b.scope, &a.scope);
    let to_member = a.measure.level() == Level::Community
        && b.measure.level() == Level::Node
        && !a.focus.is_empty()
        && !b.focus.is_empty()
        && b.focus_vertices().iter().all(|v| a.focus_vertices().binary_search(v).is_ok());
    let to_share = matches!(a.fact_type, FactType::Extreme | FactType::Rank)
        && b.fact_type == FactType::Proportion
        && a.measure == b.measure
        && focus_within(b, a);
    zoom || to_member || to_share
}

/// Logical and topological relation from `fp` to `fs`.
pub fn classify_relation(fp: &GraphFact, fs: &GraphFact, g: &Graph) -> (Logical, Topological) {
    (logical_relation(fp, fs), topological_relation(fp, fs, g))
}

fn logical_relation(fp: &GraphFact, fs: &GraphFact) -> Logical {
    let forward = elaboration_case(fp, fs);
    let backward = elaboration_case(fs, fp);
    if forward && !backward {
        Logical::Elaboration
    } else if backward && !forward {
        Logical::Generalization
    } else if fp.measure != fs.measure && same_focus(fp, fs) {
        Logical::Similarity
    } else if fp.fact_type == fs.fact_type
        && fp.subgraph == fs.subgraph
        && fp.partition == fs.partition
        && fp.measure != fs.measure
        && !same_focus(fp, fs)
    {
        Logical::Contrast
    } else {
        Logical::None
    }
}

fn topological_relation(fp: &GraphFact, fs: &GraphFact, g: &Graph) -> Topological {
    let a = fp.focus_vertices();
    let b = fs.focus_vertices();
    if a.is_empty() || b.is_empty() {
        return Topological::Unconnected;
    }
    if a.iter().any(|v| b.binary_search(v).is_ok()) {
        return Topological::SameFocus;
    }
    if a.iter().any(|&v| g.neighbors(v).iter().any(|w| b.binary_search(w).is_ok())) {
        Topological::ConnectedFocus
    } else {
        Topological::Unconnected
    }
}

/// Harmonic mean of the topological cost (0, 1 or ∞) and the narrative
/// cost `1 / (1 + p(r))`, weighted by γ1 and γ2.
pub fn relation_cost(logical: Logical, topological: Topological, cfg: &ExpansionConfig) -> f64 {
    let p = cfg.prior(logical);
    let nc = 1.0 / (1.0 + p);
    let tc = match topological {
        Topological::SameFocus => 0.0,
        Topological::ConnectedFocus => 1.0,
        Topological::Unconnected => f64::INFINITY,
    };
    if tc == 0.0 {
        return 0.0;
    }
    let inv_tc = if tc.is_infinite() { 0.0 } else { cfg.gamma1 / tc };
    (cfg.gamma1 + cfg.gamma2) / (inv_tc + cfg.gamma2 / nc)
}
