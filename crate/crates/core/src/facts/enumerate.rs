use std::collections::BTreeSet;

use rayon::prelude::*;

use super::interest::{self, SkipReason};
use super::{canonical_key, fact_id, impact, score_fact, DiscoveryConfig, FactType, Filter, GraphFact};
use crate::error::{Error, Result};
use crate::graph::{
    community_features, node_features, partition, Component, FeatureVector, Graph, NodeIx, Partition,
    PartitionMethod,
};

const RECOMMEND_LIMIT: usize = 20;

/// A filtered node set of the host graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub filters: Vec<Filter>,
    pub nodes: Vec<NodeIx>,
}

/// Filter fields with the node set matched by each value.
fn filter_fields(g: &Graph, cfg: &DiscoveryConfig) -> Vec<(String, Vec<(String, Vec<NodeIx>)>)> {
    let mut fields = vec![];
    for attr in cfg.filter_attributes(g) {
        let values = g
            .categories(&attr)
            .into_iter()
            .map(|c| {
                let nodes: Vec<NodeIx> =
                    (0..g.node_count()).filter(|&v| g.node(v).categorical.get(&attr) == Some(&c)).collect();
                (c, nodes)
            })
            .collect();
        fields.push((attr, values));
    }
    for method in cfg.partition_methods(g) {
        if !matches!(method, PartitionMethod::GreedyModularity | PartitionMethod::ConnectedComponents) {
            continue;
        }
        let Ok(p) = partition(g, &g.all_nodes(), &method) else { continue };
        if p.len() < 2 {
            continue;
        }
        let values = p.communities.iter().map(|c| (c.id.to_string(), c.members.clone())).collect();
        fields.push((method.to_string(), values));
    }
    fields
}

fn joined(g: &Graph, a: &[NodeIx], b: &[NodeIx]) -> bool {
    let mask = g.mask(b);
    a.iter().any(|&v| g.neighbors(v).iter().any(|&w| mask[w]))
}

/// Candidate subgraphs: the whole graph, every single filter, and (from
/// depth 2) every pair of values of one field whose node sets share an
/// edge. Subgraphs with an already seen node set are dropped.
pub fn subgraphs(g: &Graph, cfg: &DiscoveryConfig) -> Vec<Subgraph> {
    let mut out = vec![Subgraph { filters: vec![], nodes: g.all_nodes() }];
    if cfg.max_depth == 0 {
        return out;
    }
    let fields = filter_fields(g, cfg);
    let mut candidates = vec![];
    for (field, values) in &fields {
        for (value, nodes) in values {
            candidates.push(Subgraph { filters: vec![Filter { field: field.clone(), value: value.clone() }], nodes: nodes.clone() });
        }
    }
    if cfg.max_depth >= 2 {
        for (field, values) in &fields {
            for i in 0..values.len() {
                for j in i + 1..values.len() {
                    let (a, b) = (&values[i], &values[j]);
                    if !joined(g, &a.1, &b.1) {
                        continue;
                    }
                    let mut nodes: Vec<NodeIx> = a.1.iter().chain(&b.1).copied().collect();
                    nodes.sort_unstable();
                    nodes.dedup();
                    let filters = vec![
                        Filter { field: field.clone(), value: a.0.clone() },
                        Filter { field: field.clone(), value: b.0.clone() },
                    ];
                    candidates.push(Subgraph { filters, nodes });
                }
            }
        }
    }
    let mut seen: BTreeSet<Vec<NodeIx>> = BTreeSet::new();
    seen.insert(out[0].nodes.clone());
    for c in candidates {
        if !c.nodes.is_empty() && seen.insert(c.nodes.clone()) {
            out.push(c);
        }
    }
    out
}

/// Feature vectors of one (subgraph, partition) pair with the tie-break
/// keys and adjacency of their components.
struct Slice {
    features: Vec<FeatureVector>,
    keys: Vec<usize>,
    neighbours: Vec<Vec<usize>>,
}

fn node_slice(g: &Graph, nodes: &[NodeIx]) -> Result<Slice> {
    let features = node_features(g, nodes)?;
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = i;
    }
    let neighbours =
        nodes.iter().map(|&v| g.neighbors(v).iter().filter(|&&w| local[w] != usize::MAX).map(|&w| local[w]).collect()).collect();
    let keys = nodes.iter().map(|&v| g.id_rank(v)).collect();
    Ok(Slice { features: features.into_values().collect(), keys, neighbours })
}

fn community_slice(g: &Graph, p: &Partition) -> Result<Slice> {
    let features = community_features(g, p)?;
    let membership = p.membership(g.node_count());
    let mut neighbours = vec![BTreeSet::new(); p.len()];
    for e in g.edges() {
        if let (Some(a), Some(b)) = (membership[e.source], membership[e.target]) {
            if a != b {
                neighbours[a].insert(b);
                neighbours[b].insert(a);
            }
        }
    }
    let keys = p.communities.iter().map(|c| c.members.iter().map(|&v| g.id_rank(v)).min().unwrap_or(0)).collect();
    Ok(Slice {
        features: features.into_values().collect(),
        keys,
        neighbours: neighbours.into_iter().map(|s| s.into_iter().collect()).collect(),
    })
}

/// Facts of one subgraph under one partition method, unsorted.
pub fn facts_for_slice(g: &Graph, cfg: &DiscoveryConfig, sub: &Subgraph, method: &PartitionMethod) -> Vec<GraphFact> {
    let slice = match method {
        PartitionMethod::None => node_slice(g, &sub.nodes),
        _ => partition(g, &sub.nodes, method).and_then(|p| {
            if p.len() < 2 {
                Err(Error::EmptyScope)
            } else {
                community_slice(g, &p)
            }
        }),
    };
    let Ok(slice) = slice else { return vec![] };
    let Ok(imp) = impact(g, &sub.nodes) else { return vec![] };
    let mut out = vec![];
    for fv in &slice.features {
        if let Some(measures) = &cfg.measures {
            if !measures.contains(&fv.measure) {
                continue;
            }
        }
        for t in FactType::ALL {
            let eval = interest::evaluate(t, &fv.values, &slice.keys, &slice.neighbours, cfg.beta, cfg.rank_k, cfg.seed);
            let eval = match eval {
                Ok(e) => e,
                Err(reason) => {
                    log_skip(t, fv, reason);
                    continue;
                }
            };
            let focus: Vec<Component> = eval.focus.iter().map(|&i| fv.components[i].clone()).collect();
            let focus_values = eval.focus.iter().filter_map(|&i| fv.values[i].finite()).collect();
            let key = canonical_key(g, t, &sub.filters, method, &fv.measure, &focus);
            out.push(GraphFact {
                id: fact_id(&key),
                fact_type: t,
                subgraph: sub.filters.clone(),
                partition: method.clone(),
                measure: fv.measure.clone(),
                focus,
                impact: imp,
                interestingness: eval.interestingness,
                score: score_fact(imp, eval.interestingness),
                scope: sub.nodes.clone(),
                focus_values,
                values: fv.finite_values().unwrap_or_default(),
            });
        }
    }
    out
}

fn log_skip(t: FactType, fv: &FeatureVector, reason: SkipReason) {
    log::trace!("skipping {t} on {}: {reason:?}", fv.measure);
}

/// Every applicable fact over the candidate subgraphs, partitions and
/// measures, sorted by descending score then canonical key and truncated to
/// `cfg.max_facts`.
pub fn enumerate_facts(g: &Graph, cfg: &DiscoveryConfig) -> Result<Vec<GraphFact>> {
    cfg.validate()?;
    let subs = subgraphs(g, cfg);
    let methods = cfg.partition_methods(g);
    let pairs: Vec<(&Subgraph, &PartitionMethod)> = subs.iter().flat_map(|s| methods.iter().map(move |m| (s, m))).collect();
    let mut facts: Vec<(String, GraphFact)> = pairs
        .par_iter()
        .flat_map_iter(|(s, m)| facts_for_slice(g, cfg, s, m))
        .map(|f| (f.canonical_key(g), f))
        .collect();
    facts.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then_with(|| a.0.cmp(&b.0)));
    facts.truncate(cfg.max_facts);
    Ok(facts.into_iter().map(|(_, f)| f).collect())
}

/// A component reference in `node:ID` or `community:ID` form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FocusQuery {
    Node(String),
    Community(usize),
}

impl std::str::FromStr for FocusQuery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(id) = s.strip_prefix("node:") {
            Ok(FocusQuery::Node(id.to_string()))
        } else if let Some(id) = s.strip_prefix("community:") {
            id.parse().map(FocusQuery::Community).map_err(|_| Error::UnknownFocus(s.to_string()))
        } else {
            Err(Error::UnknownFocus(s.to_string()))
        }
    }
}

/// Resolves a focus query; community ids refer to the whole-graph partition
/// produced by `method`.
pub fn resolve_focus(g: &Graph, query: &FocusQuery, method: &PartitionMethod) -> Result<Component> {
    match query {
        FocusQuery::Node(id) => g.lookup(id).map(Component::Node).ok_or_else(|| Error::UnknownFocus(format!("node:{id}"))),
        FocusQuery::Community(id) => {
            let p = partition(g, &g.all_nodes(), method).map_err(|_| Error::UnknownFocus(format!("community:{id}")))?;
            p.communities
                .iter()
                .find(|c| c.id == *id)
                .map(|c| Component::Community { id: c.id, members: c.members.clone() })
                .ok_or_else(|| Error::UnknownFocus(format!("community:{id}")))
        }
    }
}

fn focus_matches(f: &GraphFact, target: &Component) -> bool {
    f.focus.iter().any(|c| match (target, c) {
        (Component::Node(v), Component::Node(w)) => v == w,
        (Component::Node(v), Component::Community { members, .. }) => members.binary_search(v).is_ok(),
        (Component::Community { members, .. }, Component::Node(w)) => members.binary_search(w).is_ok(),
        (Component::Community { members: a, .. }, Component::Community { members: b, .. }) => a == b,
    })
}

/// The best-scored facts (at most 20) whose focus equals or contains the
/// queried component, in the order of `facts`.
pub fn recommend_facts(
    g: &Graph,
    facts: &[GraphFact],
    query: &FocusQuery,
    method: &PartitionMethod,
) -> Result<Vec<GraphFact>> {
    let target = resolve_focus(g, query, method)?;
    Ok(facts.iter().filter(|f| focus_matches(f, &target)).take(RECOMMEND_LIMIT).cloned().collect())
}
