use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{OrganizeConfig, Relation, Topic, Topological};
use crate::error::{Error, Result};
use crate::facts::{facts_for_slice, DiscoveryConfig, FactType, Filter, GraphFact, Subgraph};
use crate::graph::{community_features, partition, Component, Graph, Level, Measure, NodeIx, PartitionMethod};

const MAX_EVIDENCE: usize = 4;

/// A topic root plus the evidence facts that instantiate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSkeleton {
    pub topic: Topic,
    pub variant: String,
    pub root: GraphFact,
    pub evidence: Vec<(GraphFact, Relation)>,
    pub parameters: BTreeMap<String, String>,
}

fn skeleton(
    topic: Topic,
    variant: &str,
    root: &GraphFact,
    evidence: impl IntoIterator<Item = GraphFact>,
    g: &Graph,
    cfg: &OrganizeConfig,
    parameters: BTreeMap<String, String>,
) -> TopicSkeleton {
    let mut seen = BTreeSet::from([root.id.clone()]);
    let evidence = evidence
        .into_iter()
        .filter(|f| seen.insert(f.id.clone()))
        .take(MAX_EVIDENCE)
        .map(|f| {
            let r = Relation::between(root, &f, g, &cfg.expansion);
            (f, r)
        })
        .collect();
    TopicSkeleton { topic, variant: variant.to_string(), root: root.clone(), evidence, parameters }
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn node_extremes(pool: &[GraphFact]) -> impl Iterator<Item = &GraphFact> {
    pool.iter().filter(|f| f.fact_type == FactType::Extreme && f.partition == PartitionMethod::None)
}

/// Skeletons of `topic` over a fact pool sorted by descending score.
pub fn build_skeletons(
    g: &Graph,
    pool: &[GraphFact],
    topic: Topic,
    dcfg: &DiscoveryConfig,
    cfg: &OrganizeConfig,
) -> Result<Vec<TopicSkeleton>> {
    if pool.is_empty() {
        return Err(Error::EmptyFactPool);
    }
    let out = match topic {
        Topic::ExploringLocalNeighbors => local_neighbors(g, pool, cfg),
        Topic::DetectingKeyPlayers => key_players(g, pool, cfg),
        Topic::AllianceAndOpposition => alliance(g, pool, cfg),
        Topic::RevealingHiddenTies => hidden_ties(g, pool, dcfg, cfg)?,
    };
    if out.is_empty() {
        return Err(Error::InfeasibleTopic { topic: topic.to_string(), reason: "no qualifying facts".into() });
    }
    Ok(out)
}

/// One skeleton per central-node candidate: the best Extreme facts of each
/// node measure, with facts about the node and its neighbours as evidence.
fn local_neighbors(g: &Graph, pool: &[GraphFact], cfg: &OrganizeConfig) -> Vec<TopicSkeleton> {
    let mut per_measure: BTreeMap<&Measure, Vec<&GraphFact>> = BTreeMap::new();
    for f in node_extremes(pool) {
        let list = per_measure.entry(&f.measure).or_default();
        if list.len() < cfg.central_candidates {
            list.push(f);
        }
    }
    let mut roots: Vec<&GraphFact> = per_measure.into_values().flatten().collect();
    roots.sort_by(|a, b| b.score.total_cmp(&a.score));
    roots
        .into_iter()
        .map(|root| {
            let mut related: Vec<(Topological, &GraphFact)> = pool
                .iter()
                .filter(|f| f.id != root.id && f.measure.level() == Level::Node && !f.focus.is_empty())
                .map(|f| (Relation::between(root, f, g, &cfg.expansion).topological, f))
                .filter(|(t, _)| *t != Topological::Unconnected)
                .collect();
            // Neighbours first, then the node itself; pool order within each.
            related.sort_by_key(|(t, _)| match t {
                Topological::ConnectedFocus => 0,
                _ => 1,
            });
            let node = g.id(root.focus_vertices()[0]).to_string();
            skeleton(
                Topic::ExploringLocalNeighbors,
                "central-node",
                root,
                related.into_iter().map(|(_, f)| f.clone()),
                g,
                cfg,
                params(&[("measure", root.measure.to_string()), ("node", node)]),
            )
        })
        .collect()
}

fn filters_label(filters: &[Filter]) -> String {
    if filters.is_empty() {
        "all".into()
    } else {
        filters.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("+")
    }
}

/// Within-Measure: the top nodes of one measure across subgraphs.
/// Within-Subgraph: the top nodes of every measure inside one subgraph.
fn key_players(g: &Graph, pool: &[GraphFact], cfg: &OrganizeConfig) -> Vec<TopicSkeleton> {
    let mut out = vec![];
    let mut by_measure: BTreeMap<&Measure, Vec<&GraphFact>> = BTreeMap::new();
    let mut by_subgraph: BTreeMap<&Vec<Filter>, Vec<&GraphFact>> = BTreeMap::new();
    for f in node_extremes(pool) {
        by_measure.entry(&f.measure).or_default().push(f);
        by_subgraph.entry(&f.subgraph).or_default().push(f);
    }
    for (measure, facts) in by_measure {
        let root = facts[0];
        let mut seen_focus = BTreeSet::from([root.focus_vertices()]);
        let evidence: Vec<GraphFact> =
            facts[1..].iter().filter(|f| seen_focus.insert(f.focus_vertices())).map(|f| (*f).clone()).collect();
        if evidence.is_empty() {
            continue;
        }
        out.push(skeleton(
            Topic::DetectingKeyPlayers,
            "within-measure",
            root,
            evidence,
            g,
            cfg,
            params(&[("measure", measure.to_string())]),
        ));
    }
    for (filters, facts) in by_subgraph {
        let root = facts[0];
        let mut seen_measure = BTreeSet::from([&root.measure]);
        let evidence: Vec<GraphFact> =
            facts[1..].iter().filter(|f| seen_measure.insert(&f.measure)).map(|f| (*f).clone()).collect();
        if evidence.is_empty() {
            continue;
        }
        out.push(skeleton(
            Topic::DetectingKeyPlayers,
            "within-subgraph",
            root,
            evidence,
            g,
            cfg,
            params(&[("subgraph", filters_label(filters))]),
        ));
    }
    out.sort_by(|a, b| b.root.score.total_cmp(&a.root.score));
    out
}

/// Per (subgraph, partition): the best Rank over a topological community
/// feature, with the other community facts of that partition as evidence.
fn alliance(g: &Graph, pool: &[GraphFact], cfg: &OrganizeConfig) -> Vec<TopicSkeleton> {
    let mut groups: BTreeMap<(&Vec<Filter>, &PartitionMethod), Vec<&GraphFact>> = BTreeMap::new();
    for f in pool.iter().filter(|f| f.measure.level() == Level::Community) {
        groups.entry((&f.subgraph, &f.partition)).or_default().push(f);
    }
    let mut out = vec![];
    for ((filters, method), facts) in groups {
        let Some(root) = facts.iter().find(|f| f.fact_type == FactType::Rank && f.measure.is_topological()) else {
            continue;
        };
        let mut seen = BTreeSet::from([(root.fact_type, &root.measure)]);
        let evidence: Vec<GraphFact> = facts
            .iter()
            .filter(|f| f.fact_type != FactType::Rank && seen.insert((f.fact_type, &f.measure)))
            .map(|f| (*f).clone())
            .collect();
        out.push(skeleton(
            Topic::AllianceAndOpposition,
            "communities",
            root,
            evidence,
            g,
            cfg,
            params(&[("partition", method.to_string()), ("subgraph", filters_label(filters))]),
        ));
    }
    out.sort_by(|a, b| b.root.score.total_cmp(&a.root.score));
    out
}

/// The two adjacent communities with the highest combined separability,
/// rooted at the Extreme fact of their union whose focus has the most edges
/// crossing between them.
fn hidden_ties(g: &Graph, pool: &[GraphFact], dcfg: &DiscoveryConfig, cfg: &OrganizeConfig) -> Result<Vec<TopicSkeleton>> {
    let method = &cfg.tie_partition;
    let infeasible = |reason: &str| Error::InfeasibleTopic { topic: Topic::RevealingHiddenTies.to_string(), reason: reason.into() };
    let p = partition(g, &g.all_nodes(), method).map_err(|e| infeasible(&e.to_string()))?;
    if p.len() < 2 {
        return Err(infeasible("fewer than two communities"));
    }
    let sep = &community_features(g, &p)?[&Measure::Separability];
    let membership = p.membership(g.node_count());
    let mut adjacent = BTreeSet::new();
    for e in g.edges() {
        if let (Some(a), Some(b)) = (membership[e.source], membership[e.target]) {
            if a != b {
                adjacent.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut best: Option<((usize, usize), f64)> = None;
    for &(a, b) in &adjacent {
        let (Some(sa), Some(sb)) = (sep.values[a].finite(), sep.values[b].finite()) else { continue };
        if best.is_none_or(|(_, s)| sa + sb > s) {
            best = Some(((a, b), sa + sb));
        }
    }
    let Some(((a, b), _)) = best else { return Err(infeasible("no adjacent communities")) };
    let (ca, cb) = (&p.communities[a], &p.communities[b]);
    let mut nodes: Vec<NodeIx> = ca.members.iter().chain(&cb.members).copied().collect();
    nodes.sort_unstable();
    let field = method.to_string();
    let sub = Subgraph {
        filters: vec![
            Filter { field: field.clone(), value: ca.id.to_string() },
            Filter { field, value: cb.id.to_string() },
        ],
        nodes,
    };
    let cross = |v: NodeIx| {
        let other = if membership[v] == Some(a) { b } else { a };
        g.neighbors(v).iter().filter(|&&w| membership[w] == Some(other)).count()
    };
    let mut union_facts = facts_for_slice(g, dcfg, &sub, &PartitionMethod::None);
    union_facts.sort_by(|x, y| y.score.total_cmp(&x.score).then_with(|| x.canonical_key(g).cmp(&y.canonical_key(g))));
    let mut root: Option<(&GraphFact, usize)> = None;
    for f in union_facts.iter().filter(|f| f.fact_type == FactType::Extreme) {
        let c = cross(f.focus_vertices()[0]);
        if root.is_none_or(|(_, best)| c > best) {
            root = Some((f, c));
        }
    }
    let Some((root, _)) = root else { return Err(infeasible("no extreme fact in the community union")) };
    let tie = root.focus_vertices()[0];
    let is_pair = |c: &Component| match c {
        Component::Community { members, .. } => members == &ca.members || members == &cb.members,
        _ => false,
    };
    let mut evidence: Vec<GraphFact> = vec![];
    for members in [&ca.members, &cb.members] {
        if let Some(f) = pool.iter().find(|f| {
            f.subgraph.is_empty()
                && &f.partition == method
                && f.focus.len() == 1
                && matches!(&f.focus[0], Component::Community { members: m, .. } if m == members)
        }) {
            evidence.push(f.clone());
        }
    }
    evidence.extend(
        pool.iter()
            .filter(|f| f.subgraph.is_empty() && &f.partition == method && f.focus.iter().any(is_pair))
            .cloned(),
    );
    evidence.extend(union_facts.iter().filter(|f| f.id != root.id && f.focus_vertices().contains(&tie)).cloned());
    let sk = skeleton(
        Topic::RevealingHiddenTies,
        "community-pair",
        root,
        evidence,
        g,
        cfg,
        params(&[
            ("partition", method.to_string()),
            ("communities", format!("{},{}", ca.id, cb.id)),
            ("node", g.id(tie).to_string()),
            ("cross-edges", cross(tie).to_string()),
        ]),
    );
    Ok(vec![sk])
}
