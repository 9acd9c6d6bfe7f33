use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Graph, NodeIx};
use crate::error::{Error, Result};

/// How a node set is divided into components.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PartitionMethod {
    None,
    ConnectedComponents,
    GreedyModularity,
    Categorical(String),
}

impl PartitionMethod {
    pub fn is_community_level(&self) -> bool {
        !matches!(self, PartitionMethod::None)
    }
}

impl fmt::Display for PartitionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionMethod::None => f.write_str("none"),
            PartitionMethod::ConnectedComponents => f.write_str("connected-components"),
            PartitionMethod::GreedyModularity => f.write_str("greedy-modularity"),
            PartitionMethod::Categorical(a) => write!(f, "attr:{a}"),
        }
    }
}

impl std::str::FromStr for PartitionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PartitionMethod::None),
            "connected-components" => Ok(PartitionMethod::ConnectedComponents),
            "greedy-modularity" => Ok(PartitionMethod::GreedyModularity),
            _ => match s.strip_prefix("attr:") {
                Some(a) if !a.is_empty() => Ok(PartitionMethod::Categorical(a.to_string())),
                _ => Err(Error::Config(format!("unknown partition method '{s}'"))),
            },
        }
    }
}

impl From<PartitionMethod> for String {
    fn from(m: PartitionMethod) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for PartitionMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Community {
    pub id: usize,
    /// Sorted node indices.
    pub members: Vec<NodeIx>,
    /// Category value for attribute partitions.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub method: PartitionMethod,
    pub communities: Vec<Community>,
}

impl Partition {
    /// Community index per node; `None` for nodes outside the partitioned set.
    pub fn membership(&self, node_count: usize) -> Vec<Option<usize>> {
        let mut m = vec![None; node_count];
        for c in &self.communities {
            for &v in &c.members {
                m[v] = Some(c.id);
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    /// Builds a partition from raw groups, assigning ids by size (largest
    /// first) and then by the lexicographically smallest member id.
    fn from_groups(g: &Graph, method: PartitionMethod, groups: Vec<(Vec<NodeIx>, Option<String>)>) -> Self {
        let mut groups: Vec<_> = groups
            .into_iter()
            .filter(|(m, _)| !m.is_empty())
            .map(|(mut m, l)| {
                m.sort_unstable();
                let key = m.iter().map(|&v| g.id_rank(v)).min().unwrap_or(usize::MAX);
                (m, l, key)
            })
            .collect();
        groups.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.2.cmp(&b.2)));
        let communities = groups
            .into_iter()
            .enumerate()
            .map(|(id, (members, label, _))| Community { id, members, label })
            .collect();
        Partition { method, communities }
    }
}

/// Partitions `scope` with the given method.
pub fn partition(g: &Graph, scope: &[NodeIx], method: &PartitionMethod) -> Result<Partition> {
    if scope.is_empty() {
        return Err(Error::EmptyScope);
    }
    match method {
        PartitionMethod::None => Ok(Partition::from_groups(
            g,
            PartitionMethod::None,
            scope.iter().map(|&v| (vec![v], None)).collect(),
        )),
        PartitionMethod::ConnectedComponents => connected_components(g, scope),
        PartitionMethod::GreedyModularity => greedy_modularity(g, scope),
        PartitionMethod::Categorical(attr) => {
            let mut groups: BTreeMap<Option<String>, Vec<NodeIx>> = BTreeMap::new();
            for &v in scope {
                groups.entry(g.node(v).categorical.get(attr).cloned()).or_default().push(v);
            }
            Ok(Partition::from_groups(
                g,
                method.clone(),
                groups.into_iter().map(|(label, m)| (m, Some(label.unwrap_or_else(|| "(missing)".into())))).collect(),
            ))
        }
    }
}

/// Maximal connected components of the subgraph induced by `scope`.
pub fn connected_components(g: &Graph, scope: &[NodeIx]) -> Result<Partition> {
    if scope.is_empty() {
        return Err(Error::EmptyScope);
    }
    let mask = g.mask(scope);
    let mut seen = vec![false; g.node_count()];
    let mut groups = Vec::new();
    for &start in scope {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if mask[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        groups.push((comp, None));
    }
    Ok(Partition::from_groups(g, PartitionMethod::ConnectedComponents, groups))
}

/// Clauset-Newman-Moore greedy modularity maximization on the subgraph
/// induced by `scope`.
///
/// Gains are compared exactly in integer arithmetic: merging communities
/// `i` and `j` changes modularity by `(2m·e_ij − k_i·k_j) / 2m²` where `e_ij`
/// counts edges between them and `k` are degree sums. Equal gains go to the
/// pair with the lexicographically smallest (min member id, min member id).
pub fn greedy_modularity(g: &Graph, scope: &[NodeIx]) -> Result<Partition> {
    if scope.is_empty() {
        return Err(Error::EmptyScope);
    }
    let mask = g.mask(scope);
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &v) in scope.iter().enumerate() {
        local[v] = i;
    }
    let n = scope.len();
    let mut links: Vec<BTreeMap<usize, i128>> = vec![BTreeMap::new(); n];
    let mut degree_sum = vec![0i128; n];
    let mut m: i128 = 0;
    for e in g.edges() {
        if mask[e.source] && mask[e.target] {
            let (a, b) = (local[e.source], local[e.target]);
            *links[a].entry(b).or_default() += 1;
            *links[b].entry(a).or_default() += 1;
            degree_sum[a] += 1;
            degree_sum[b] += 1;
            m += 1;
        }
    }
    if m == 0 {
        return Err(Error::EdgelessScope);
    }
    let mut members: Vec<Vec<NodeIx>> = scope.iter().map(|&v| vec![v]).collect();
    let mut min_rank: Vec<usize> = scope.iter().map(|&v| g.id_rank(v)).collect();
    let mut alive = vec![true; n];

    loop {
        let mut best: Option<(i128, (usize, usize), usize, usize)> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for (&j, &e) in &links[i] {
                if j <= i {
                    continue;
                }
                let gain = 2 * m * e - degree_sum[i] * degree_sum[j];
                let key = if min_rank[i] <= min_rank[j] { (min_rank[i], min_rank[j]) } else { (min_rank[j], min_rank[i]) };
                let better = match &best {
                    None => true,
                    Some((bg, bk, _, _)) => gain > *bg || (gain == *bg && key < *bk),
                };
                if better {
                    best = Some((gain, key, i, j));
                }
            }
        }
        let Some((gain, _, i, j)) = best else { break };
        if gain <= 0 {
            break;
        }
        // Merge j into i.
        let moved = std::mem::take(&mut links[j]);
        for (k, e) in moved {
            if k == i {
                continue;
            }
            *links[i].entry(k).or_default() += e;
            let lk = &mut links[k];
            lk.remove(&j);
            *lk.entry(i).or_default() += e;
        }
        links[i].remove(&j);
        degree_sum[i] += degree_sum[j];
        let taken = std::mem::take(&mut members[j]);
        members[i].extend(taken);
        min_rank[i] = min_rank[i].min(min_rank[j]);
        alive[j] = false;
    }
    let groups = members
        .into_iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(m, _)| (m, None))
        .collect();
    Ok(Partition::from_groups(g, PartitionMethod::GreedyModularity, groups))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(p: &Partition) -> Vec<usize> {
        p.communities.iter().map(|c| c.members.len()).collect()
    }

    #[test]
    fn triangle_is_one_component() {
        let g = Graph::from_edge_list("t", &["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]).unwrap();
        assert_eq!(sizes(&connected_components(&g, &g.all_nodes()).unwrap()), vec![3]);
    }

    #[test]
    fn two_disjoint_edges() {
        let g = Graph::from_edge_list("t", &["a", "b", "c", "d"], &[("a", "b"), ("c", "d")]).unwrap();
        let p = connected_components(&g, &g.all_nodes()).unwrap();
        assert_eq!(sizes(&p), vec![2, 2]);
        assert_eq!(p.communities[0].members, vec![0, 1]);
    }

    #[test]
    fn scope_restricts_components() {
        let g = Graph::from_edge_list("t", &["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let p = connected_components(&g, &[0, 2]).unwrap();
        assert_eq!(sizes(&p), vec![1, 1]);
        assert!(matches!(connected_components(&g, &[]), Err(Error::EmptyScope)));
    }

    #[test]
    fn barbell_splits_into_triangles() {
        let g = Graph::from_edge_list(
            "t",
            &["a", "b", "c", "d", "e", "f"],
            &[("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f"), ("c", "d")],
        )
        .unwrap();
        let p = greedy_modularity(&g, &g.all_nodes()).unwrap();
        assert_eq!(sizes(&p), vec![3, 3]);
        assert_eq!(p.communities[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn complete_graph_is_single_community() {
        let ids = ["a", "b", "c", "d"];
        let mut edges = vec![];
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((ids[i], ids[j]));
            }
        }
        let g = Graph::from_edge_list("k4", &ids, &edges).unwrap();
        assert_eq!(sizes(&greedy_modularity(&g, &g.all_nodes()).unwrap()), vec![4]);
    }

    #[test]
    fn edgeless_scope_is_an_error() {
        let g = Graph::from_edge_list("t", &["a", "b"], &[]).unwrap();
        assert!(matches!(greedy_modularity(&g, &g.all_nodes()), Err(Error::EdgelessScope)));
    }

    #[test]
    fn categorical_groups_by_value() {
        let doc = r#"{"nodes":[{"id":"a","c":"x"},{"id":"b","c":"y"},{"id":"d","c":"x"},{"id":"e"}],"edges":[]}"#;
        let g = crate::graph::parse_graph(doc).unwrap();
        let p = partition(&g, &g.all_nodes(), &PartitionMethod::Categorical("c".into())).unwrap();
        assert_eq!(sizes(&p), vec![2, 1, 1]);
        assert_eq!(p.communities[0].label.as_deref(), Some("x"));
    }

    #[test]
    fn method_round_trips_through_text() {
        for m in [
            PartitionMethod::None,
            PartitionMethod::ConnectedComponents,
            PartitionMethod::GreedyModularity,
            PartitionMethod::Categorical("country".into()),
        ] {
            assert_eq!(m.to_string().parse::<PartitionMethod>().unwrap(), m);
        }
        assert!("louvain".parse::<PartitionMethod>().is_err());
    }
}
