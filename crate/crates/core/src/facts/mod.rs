//! Graph data facts: enumeration over subgraphs, partitions and measures,
//! and scoring by impact × interestingness.

mod enumerate;
pub mod interest;
pub mod stats;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Component, Graph, Measure, NodeIx, PartitionMethod};

pub use enumerate::{enumerate_facts, facts_for_slice, recommend_facts, resolve_focus, subgraphs, FocusQuery, Subgraph};
pub use interest::SkipReason;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FactType {
    Extreme,
    Outlier,
    Rank,
    Proportion,
    Distribution,
    Evenness,
}

impl FactType {
    pub const ALL: [FactType; 6] = [
        FactType::Extreme,
        FactType::Outlier,
        FactType::Rank,
        FactType::Proportion,
        FactType::Distribution,
        FactType::Evenness,
    ];

    pub fn has_focus(self) -> bool {
        !matches!(self, FactType::Distribution | FactType::Evenness)
    }
}

impl fmt::Display for FactType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for FactType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FactType::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown fact type '{s}'")))
    }
}

/// Zooms into the nodes whose categorical attribute `field` equals `value`,
/// or into community `value` of the whole-graph partition named by `field`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Filter {
    pub field: String,
    pub value: String,
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.field, self.value)
    }
}

/// One scored fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFact {
    pub id: String,
    pub fact_type: FactType,
    /// Union of filters; empty means the whole graph.
    pub subgraph: Vec<Filter>,
    pub partition: PartitionMethod,
    pub measure: Measure,
    pub focus: Vec<Component>,
    pub impact: f64,
    pub interestingness: f64,
    pub score: f64,
    /// Nodes of the subgraph, sorted.
    pub scope: Vec<NodeIx>,
    /// Feature values of the focus components, in focus order.
    pub focus_values: Vec<f64>,
    /// Every finite feature value of the fact's vector, in component order.
    pub values: Vec<f64>,
}

impl GraphFact {
    /// Nodes covered by the focus.
    pub fn focus_vertices(&self) -> Vec<NodeIx> {
        let mut v: Vec<NodeIx> = self.focus.iter().flat_map(|c| c.vertices().iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Share of the focus value in the total, for Proportion facts.
    pub fn share(&self) -> Option<f64> {
        let total: f64 = self.values.iter().sum();
        (self.fact_type == FactType::Proportion && total > 0.0).then(|| self.focus_values[0] / total)
    }

    pub fn is_community_level(&self) -> bool {
        self.measure.level() == crate::graph::Level::Community
    }

    /// Canonical serialization used for ids and tie-breaking.
    pub fn canonical_key(&self, g: &Graph) -> String {
        canonical_key(g, self.fact_type, &self.subgraph, &self.partition, &self.measure, &self.focus)
    }
}

pub(crate) fn focus_label(g: &Graph, c: &Component) -> String {
    match c {
        Component::Node(v) => format!("node:{}", g.id(*v)),
        Component::Community { members, .. } => {
            let mut ids: Vec<&str> = members.iter().map(|&v| g.id(v)).collect();
            ids.sort_unstable();
            format!("community:{}", ids.join(","))
        }
    }
}

pub(crate) fn canonical_key(
    g: &Graph,
    fact_type: FactType,
    subgraph: &[Filter],
    partition: &PartitionMethod,
    measure: &Measure,
    focus: &[Component],
) -> String {
    let filters: Vec<String> = subgraph.iter().map(|f| f.to_string()).collect();
    let focus: Vec<String> = focus.iter().map(|c| focus_label(g, c)).collect();
    format!("{fact_type}|{}|{partition}|{measure}|{}", filters.join("+"), focus.join(";"))
}

pub(crate) fn fact_id(key: &str) -> String {
    let digest = Sha256::digest(key.as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Bounds and parameters of fact enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryConfig {
    /// Maximum number of filters combined into one subgraph.
    pub max_depth: usize,
    /// Partition methods to try; `None` tries no partition, greedy
    /// modularity, connected components and every usable categorical
    /// attribute.
    pub partitions: Option<Vec<PartitionMethod>>,
    /// Measures to try; `None` tries all of them.
    pub measures: Option<Vec<Measure>>,
    pub beta: f64,
    pub rank_k: usize,
    pub max_facts: usize,
    /// Categorical attributes with more distinct values are not used as
    /// filters or partitions.
    pub max_filter_values: usize,
    pub seed: u64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self {
            max_depth: 2,
            partitions: None,
            measures: None,
            beta: 0.7,
            rank_k: 3,
            max_facts: 500,
            max_filter_values: 12,
            seed: 0,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank_k < 2 {
            return Err(Error::Config("rank k must be at least 2".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Config("power-law exponent must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn partition_methods(&self, g: &Graph) -> Vec<PartitionMethod> {
        if let Some(p) = &self.partitions {
            return p.clone();
        }
        let mut out = vec![PartitionMethod::None, PartitionMethod::GreedyModularity, PartitionMethod::ConnectedComponents];
        out.extend(self.filter_attributes(g).into_iter().map(PartitionMethod::Categorical));
        out
    }

    pub(crate) fn filter_attributes(&self, g: &Graph) -> Vec<String> {
        g.categorical_attributes()
            .into_iter()
            .filter(|a| {
                let n = g.categories(a).len();
                n >= 2 && n <= self.max_filter_values
            })
            .collect()
    }
}

/// Score of a fact: impact × interestingness.
pub fn score_fact(impact: f64, interestingness: f64) -> f64 {
    impact * interestingness
}

/// Impact of a subgraph: the larger of its node share and edge share.
pub fn impact(g: &Graph, scope: &[NodeIx]) -> Result<f64> {
    if scope.is_empty() {
        return Err(Error::EmptyScope);
    }
    let nodes = scope.len() as f64 / g.node_count() as f64;
    let edges = if g.edge_count() == 0 { 0.0 } else { g.induced_edge_count(scope) as f64 / g.edge_count() as f64 };
    Ok(nodes.max(edges))
}
