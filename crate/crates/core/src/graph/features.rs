use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Graph, NodeIx, Partition};
use crate::error::{Error, Result};

pub const PAGERANK_DAMPING: f64 = 0.85;
const PAGERANK_TOLERANCE: f64 = 1e-10;
const EIGENVECTOR_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Node,
    Community,
}

/// A numerical measure: a topological feature or an aggregated attribute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Measure {
    Degree,
    PageRank,
    Eigenvector,
    /// Numerical node attribute.
    Attribute(String),
    Count,
    InsideEdges,
    Density,
    AverageDegree,
    TriangleParticipation,
    CutRatio,
    Conductance,
    MaxOdf,
    AvgOdf,
    Separability,
    /// Mean of a numerical node attribute over community members.
    AttributeMean(String),
}

impl Measure {
    pub fn level(&self) -> Level {
        match self {
            Measure::Degree | Measure::PageRank | Measure::Eigenvector | Measure::Attribute(_) => Level::Node,
            _ => Level::Community,
        }
    }

    pub fn is_topological(&self) -> bool {
        !matches!(self, Measure::Attribute(_) | Measure::AttributeMean(_))
    }

    /// Human-readable name used in generated text.
    pub fn display_name(&self) -> String {
        match self {
            Measure::Degree => "degree".into(),
            Measure::PageRank => "PageRank score".into(),
            Measure::Eigenvector => "eigenvector centrality".into(),
            Measure::Attribute(a) => a.clone(),
            Measure::Count => "count".into(),
            Measure::InsideEdges => "inside edge number".into(),
            Measure::Density => "density".into(),
            Measure::AverageDegree => "average degree".into(),
            Measure::TriangleParticipation => "triangle participation ratio".into(),
            Measure::CutRatio => "cut ratio".into(),
            Measure::Conductance => "conductance".into(),
            Measure::MaxOdf => "maximum out-degree fraction".into(),
            Measure::AvgOdf => "average out-degree fraction".into(),
            Measure::Separability => "separability".into(),
            Measure::AttributeMean(a) => format!("average {a}"),
        }
    }

    pub fn node_topological() -> [Measure; 3] {
        [Measure::Degree, Measure::PageRank, Measure::Eigenvector]
    }

    pub fn community_topological() -> [Measure; 10] {
        [
            Measure::Count,
            Measure::InsideEdges,
            Measure::Density,
            Measure::AverageDegree,
            Measure::TriangleParticipation,
            Measure::CutRatio,
            Measure::Conductance,
            Measure::MaxOdf,
            Measure::AvgOdf,
            Measure::Separability,
        ]
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Degree => f.write_str("degree"),
            Measure::PageRank => f.write_str("pagerank"),
            Measure::Eigenvector => f.write_str("eigenvector"),
            Measure::Attribute(a) => write!(f, "attr:{a}"),
            Measure::Count => f.write_str("count"),
            Measure::InsideEdges => f.write_str("inside-edges"),
            Measure::Density => f.write_str("density"),
            Measure::AverageDegree => f.write_str("average-degree"),
            Measure::TriangleParticipation => f.write_str("tpr"),
            Measure::CutRatio => f.write_str("cut-ratio"),
            Measure::Conductance => f.write_str("conductance"),
            Measure::MaxOdf => f.write_str("max-odf"),
            Measure::AvgOdf => f.write_str("avg-odf"),
            Measure::Separability => f.write_str("separability"),
            Measure::AttributeMean(a) => write!(f, "mean:{a}"),
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "degree" => Measure::Degree,
            "pagerank" => Measure::PageRank,
            "eigenvector" => Measure::Eigenvector,
            "count" => Measure::Count,
            "inside-edges" => Measure::InsideEdges,
            "density" => Measure::Density,
            "average-degree" => Measure::AverageDegree,
            "tpr" => Measure::TriangleParticipation,
            "cut-ratio" => Measure::CutRatio,
            "conductance" => Measure::Conductance,
            "max-odf" => Measure::MaxOdf,
            "avg-odf" => Measure::AvgOdf,
            "separability" => Measure::Separability,
            _ => {
                if let Some(a) = s.strip_prefix("attr:") {
                    Measure::Attribute(a.to_string())
                } else if let Some(a) = s.strip_prefix("mean:") {
                    Measure::AttributeMean(a.to_string())
                } else {
                    return Err(Error::Config(format!("unknown measure '{s}'")));
                }
            }
        })
    }
}

impl From<Measure> for String {
    fn from(m: Measure) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Measure {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// A partitioned component: a single node or a community (member set).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Node(NodeIx),
    Community { id: usize, members: Vec<NodeIx> },
}

impl Component {
    pub fn vertices(&self) -> &[NodeIx] {
        match self {
            Component::Node(v) => std::slice::from_ref(v),
            Component::Community { members, .. } => members,
        }
    }
}

/// A feature value; separability with no external edge is unbounded and
/// ranks above every finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue {
    Finite(f64),
    Unbounded,
}

impl FeatureValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            FeatureValue::Finite(x) => Some(x),
            FeatureValue::Unbounded => None,
        }
    }

    /// Total order used for ranking components.
    pub fn rank_cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (FeatureValue::Unbounded, FeatureValue::Unbounded) => std::cmp::Ordering::Equal,
            (FeatureValue::Unbounded, _) => std::cmp::Ordering::Greater,
            (_, FeatureValue::Unbounded) => std::cmp::Ordering::Less,
            (FeatureValue::Finite(a), FeatureValue::Finite(b)) => a.total_cmp(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub level: Level,
    pub measure: Measure,
    pub components: Vec<Component>,
    pub values: Vec<FeatureValue>,
}

impl FeatureVector {
    /// All values when every entry is finite.
    pub fn finite_values(&self) -> Option<Vec<f64>> {
        self.values.iter().map(|v| v.finite()).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Adjacency of the subgraph induced by a node list, in local indices.
pub(crate) struct Induced {
    pub adj: Vec<Vec<usize>>,
}

impl Induced {
    pub fn new(g: &Graph, scope: &[NodeIx]) -> Self {
        let mut local = vec![usize::MAX; g.node_count()];
        for (i, &v) in scope.iter().enumerate() {
            local[v] = i;
        }
        let adj = scope
            .iter()
            .map(|&v| g.neighbors(v).iter().filter(|&&w| local[w] != usize::MAX).map(|&w| local[w]).collect())
            .collect();
        Self { adj }
    }
}

/// Degree, PageRank and eigenvector centrality of every node in the
/// subgraph induced by `scope`, plus numerical attributes carried by every
/// node of the scope.
pub fn node_features(g: &Graph, scope: &[NodeIx]) -> Result<BTreeMap<Measure, FeatureVector>> {
    if scope.is_empty() {
        return Err(Error::EmptyScope);
    }
    let sub = Induced::new(g, scope);
    let components: Vec<Component> = scope.iter().map(|&v| Component::Node(v)).collect();
    let make = |measure: Measure, values: Vec<f64>| FeatureVector {
        level: Level::Node,
        measure,
        components: components.clone(),
        values: values.into_iter().map(FeatureValue::Finite).collect(),
    };
    let mut out = BTreeMap::new();
    let degree: Vec<f64> = sub.adj.iter().map(|a| a.len() as f64).collect();
    out.insert(Measure::Degree, make(Measure::Degree, degree));
    out.insert(Measure::PageRank, make(Measure::PageRank, pagerank(&sub.adj)?));
    out.insert(Measure::Eigenvector, make(Measure::Eigenvector, eigenvector_centrality(&sub.adj)?));
    for attr in g.numerical_attributes() {
        let vals: Option<Vec<f64>> = scope.iter().map(|&v| g.node(v).numerical.get(&attr).copied()).collect();
        if let Some(vals) = vals {
            let m = Measure::Attribute(attr);
            out.insert(m.clone(), make(m, vals));
        }
    }
    Ok(out)
}

/// PageRank with damping 0.85; dangling nodes spread their mass uniformly.
pub(crate) fn pagerank(adj: &[Vec<usize>]) -> Result<Vec<f64>> {
    let n = adj.len();
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    for _ in 0..MAX_ITERATIONS {
        let dangling: f64 = adj.iter().zip(&rank).filter(|(a, _)| a.is_empty()).map(|(_, r)| r).sum();
        let base = (1.0 - PAGERANK_DAMPING) / nf + PAGERANK_DAMPING * dangling / nf;
        let mut next = vec![base; n];
        for (v, a) in adj.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            let share = PAGERANK_DAMPING * rank[v] / a.len() as f64;
            for &w in a {
                next[w] += share;
            }
        }
        let total: f64 = next.iter().sum();
        for x in &mut next {
            *x /= total;
        }
        let delta: f64 = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        rank = next;
        if delta < PAGERANK_TOLERANCE {
            return Ok(rank);
        }
    }
    Err(Error::NoConvergence { measure: "pagerank".into(), iterations: MAX_ITERATIONS })
}

/// Eigenvector centrality per connected component, each scaled to a maximum
/// of 1. Isolated nodes score 0.
pub(crate) fn eigenvector_centrality(adj: &[Vec<usize>]) -> Result<Vec<f64>> {
    let n = adj.len();
    let mut out = vec![0.0; n];
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        if comp.len() == 1 {
            continue;
        }
        comp.sort_unstable();
        // Power iteration on A + I, which shares A's leading eigenvector and
        // does not oscillate on bipartite components.
        let mut x: Vec<f64> = vec![1.0; n];
        let mut converged = false;
        for _ in 0..MAX_ITERATIONS {
            let mut next = vec![0.0; n];
            for &v in &comp {
                let mut s = x[v];
                for &w in &adj[v] {
                    s += x[w];
                }
                next[v] = s;
            }
            let max = comp.iter().map(|&v| next[v]).fold(0.0, f64::max);
            for &v in &comp {
                next[v] /= max;
            }
            let delta = comp.iter().map(|&v| (next[v] - x[v]).abs()).fold(0.0, f64::max);
            x = next;
            if delta < EIGENVECTOR_TOLERANCE {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { measure: "eigenvector".into(), iterations: MAX_ITERATIONS });
        }
        for &v in &comp {
            out[v] = x[v];
        }
    }
    Ok(out)
}

/// Community-level features of every community of `p`, measured inside the
/// node set that `p` partitions.
///
/// Singleton communities have density and average degree 0. Separability of
/// a community without external edges is [`FeatureValue::Unbounded`].
pub fn community_features(g: &Graph, p: &Partition) -> Result<BTreeMap<Measure, FeatureVector>> {
    if p.communities.is_empty() {
        return Err(Error::EmptyScope);
    }
    let membership = p.membership(g.node_count());
    let host: usize = p.communities.iter().map(|c| c.members.len()).sum();
    let components: Vec<Component> = p
        .communities
        .iter()
        .map(|c| Component::Community { id: c.id, members: c.members.clone() })
        .collect();

    let mut columns: BTreeMap<Measure, Vec<FeatureValue>> = BTreeMap::new();
    let mut push = |m: Measure, v: FeatureValue| columns.entry(m).or_default().push(v);
    for c in &p.communities {
        let n = c.members.len();
        let mut inside = 0usize;
        let mut cut = 0usize;
        let mut odf = Vec::with_capacity(n);
        for &v in &c.members {
            let mut out_edges = 0usize;
            let mut host_degree = 0usize;
            for &w in g.neighbors(v) {
                match membership[w] {
                    Some(cw) if cw == c.id => {
                        inside += 1;
                        host_degree += 1;
                    }
                    Some(_) => {
                        out_edges += 1;
                        host_degree += 1;
                    }
                    None => {}
                }
            }
            cut += out_edges;
            odf.push(if host_degree == 0 { 0.0 } else { out_edges as f64 / host_degree as f64 });
        }
        inside /= 2;
        let nf = n as f64;
        let density = if n < 2 { 0.0 } else { 2.0 * inside as f64 / (nf * (nf - 1.0)) };
        let avg_degree = if n < 2 { 0.0 } else { 2.0 * inside as f64 / nf };
        let outside = host - n;
        let cut_ratio = if outside == 0 { 0.0 } else { cut as f64 / (nf * outside as f64) };
        let volume = 2 * inside + cut;
        let conductance = if volume == 0 { 0.0 } else { cut as f64 / volume as f64 };
        let separability = if cut == 0 {
            FeatureValue::Unbounded
        } else {
            FeatureValue::Finite(inside as f64 / cut as f64)
        };
        let tpr = triangle_participation(g, &c.members, &membership, c.id);

        push(Measure::Count, FeatureValue::Finite(nf));
        push(Measure::InsideEdges, FeatureValue::Finite(inside as f64));
        push(Measure::Density, FeatureValue::Finite(density));
        push(Measure::AverageDegree, FeatureValue::Finite(avg_degree));
        push(Measure::TriangleParticipation, FeatureValue::Finite(tpr));
        push(Measure::CutRatio, FeatureValue::Finite(cut_ratio));
        push(Measure::Conductance, FeatureValue::Finite(conductance));
        push(Measure::MaxOdf, FeatureValue::Finite(odf.iter().copied().fold(0.0, f64::max)));
        push(Measure::AvgOdf, FeatureValue::Finite(odf.iter().sum::<f64>() / nf));
        push(Measure::Separability, separability);
    }
    for attr in g.numerical_attributes() {
        let means: Option<Vec<FeatureValue>> = p
            .communities
            .iter()
            .map(|c| {
                let vals: Option<Vec<f64>> = c.members.iter().map(|&v| g.node(v).numerical.get(&attr).copied()).collect();
                vals.map(|v| FeatureValue::Finite(v.iter().sum::<f64>() / v.len() as f64))
            })
            .collect();
        if let Some(means) = means {
            columns.insert(Measure::AttributeMean(attr), means);
        }
    }
    Ok(columns
        .into_iter()
        .map(|(measure, values)| {
            (measure.clone(), FeatureVector { level: Level::Community, measure, components: components.clone(), values })
        })
        .collect())
}

fn triangle_participation(g: &Graph, members: &[NodeIx], membership: &[Option<usize>], id: usize) -> f64 {
    let inside = |w: NodeIx| membership[w] == Some(id);
    let in_triangle = members
        .iter()
        .filter(|&&v| {
            let nb: Vec<NodeIx> = g.neighbors(v).iter().copied().filter(|&w| inside(w)).collect();
            nb.iter().enumerate().any(|(i, &a)| nb[i + 1..].iter().any(|&b| g.has_edge(a, b)))
        })
        .count();
    in_triangle as f64 / members.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{partition, PartitionMethod};
    use approx::assert_abs_diff_eq;

    fn star() -> Graph {
        Graph::from_edge_list("star", &["c", "l1", "l2", "l3", "l4"], &[("c", "l1"), ("c", "l2"), ("c", "l3"), ("c", "l4")]).unwrap()
    }

    #[test]
    fn triangle_pagerank_is_uniform() {
        let g = Graph::from_edge_list("t", &["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]).unwrap();
        let f = node_features(&g, &g.all_nodes()).unwrap();
        for v in f[&Measure::PageRank].finite_values().unwrap() {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn star_degrees() {
        let g = star();
        let f = node_features(&g, &g.all_nodes()).unwrap();
        assert_eq!(f[&Measure::Degree].finite_values().unwrap(), vec![4.0, 1.0, 1.0, 1.0, 1.0]);
        let ev = f[&Measure::Eigenvector].finite_values().unwrap();
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-9);
        // Leading eigenvector of the star: leaves at 1/sqrt(4) of the center.
        assert_abs_diff_eq!(ev[1], 0.5, epsilon = 1e-8);
    }

    #[test]
    fn isolated_nodes_have_zero_eigenvector() {
        let g = Graph::from_edge_list("t", &["a", "b", "c"], &[("a", "b")]).unwrap();
        let f = node_features(&g, &g.all_nodes()).unwrap();
        assert_eq!(f[&Measure::Eigenvector].finite_values().unwrap(), vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn isolated_triangle_community() {
        let g = Graph::from_edge_list("t", &["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("a", "c")]).unwrap();
        let p = partition(&g, &g.all_nodes(), &PartitionMethod::ConnectedComponents).unwrap();
        let f = community_features(&g, &p).unwrap();
        assert_eq!(f[&Measure::Density].values[0], FeatureValue::Finite(1.0));
        assert_eq!(f[&Measure::TriangleParticipation].values[0], FeatureValue::Finite(1.0));
        assert_eq!(f[&Measure::AverageDegree].values[0], FeatureValue::Finite(2.0));
        assert_eq!(f[&Measure::Separability].values[0], FeatureValue::Unbounded);
        // The singleton.
        assert_eq!(f[&Measure::Density].values[1], FeatureValue::Finite(0.0));
        assert_eq!(f[&Measure::AverageDegree].values[1], FeatureValue::Finite(0.0));
    }

    #[test]
    fn pair_with_two_outgoing_edges() {
        // {a,b} joined by one edge, each with one edge leaving to c / d.
        let g = Graph::from_edge_list("t", &["a", "b", "c", "d"], &[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]).unwrap();
        let p = Partition {
            method: PartitionMethod::Categorical("x".into()),
            communities: vec![
                crate::graph::Community { id: 0, members: vec![0, 1], label: None },
                crate::graph::Community { id: 1, members: vec![2, 3], label: None },
            ],
        };
        let f = community_features(&g, &p).unwrap();
        assert_eq!(f[&Measure::Separability].values[0], FeatureValue::Finite(0.5));
        assert_eq!(f[&Measure::Conductance].values[0], FeatureValue::Finite(0.5));
        assert_eq!(f[&Measure::CutRatio].values[0], FeatureValue::Finite(0.5));
        assert_eq!(f[&Measure::MaxOdf].values[0], FeatureValue::Finite(0.5));
        assert_eq!(f[&Measure::AvgOdf].values[0], FeatureValue::Finite(0.5));
    }

    #[test]
    fn measure_names_round_trip() {
        let mut all: Vec<Measure> = Measure::node_topological().into_iter().chain(Measure::community_topological()).collect();
        all.push(Measure::Attribute("age".into()));
        all.push(Measure::AttributeMean("age".into()));
        for m in all {
            assert_eq!(m.to_string().parse::<Measure>().unwrap(), m);
        }
    }

    #[test]
    fn unbounded_ranks_highest() {
        assert!(FeatureValue::Unbounded.rank_cmp(&FeatureValue::Finite(1e300)).is_gt());
    }
}
