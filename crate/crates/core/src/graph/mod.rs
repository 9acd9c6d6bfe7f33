//! Graph data model, JSON parsing, partitions and topological features.

mod features;
mod partition;

pub use features::{
    community_features, node_features, Component, FeatureValue, FeatureVector, Level, Measure,
};
pub use partition::{connected_components, greedy_modularity, partition, Community, Partition, PartitionMethod};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::Value;

use crate::error::{Error, Result};

/// Index of a node inside [`Graph::nodes`].
pub type NodeIx = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub categorical: BTreeMap<String, String>,
    pub numerical: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: NodeIx,
    pub target: NodeIx,
    /// Kept for rendering only; topological features treat edges as unweighted.
    pub weight: f64,
}

/// Undirected simple graph. Node order follows the input document.
#[derive(Debug, Clone)]
pub struct Graph {
    pub name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: HashMap<String, NodeIx>,
    adjacency: Vec<Vec<NodeIx>>,
    id_rank: Vec<usize>,
}

impl Graph {
    /// Builds a graph from already-validated parts. Self-loops and duplicate
    /// edges are dropped; returns the list of normalization warnings.
    pub fn from_parts(
        name: impl Into<String>,
        nodes: Vec<Node>,
        edges: impl IntoIterator<Item = (NodeIx, NodeIx, f64)>,
    ) -> Result<(Self, Vec<String>)> {
        if nodes.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(Error::InvalidGraph {
                    location: format!("nodes[{i}]"),
                    message: format!("duplicate node id '{}'", n.id),
                });
            }
        }
        let mut warnings = Vec::new();
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        for (k, (s, t, w)) in edges.into_iter().enumerate() {
            if s >= nodes.len() || t >= nodes.len() {
                return Err(Error::InvalidGraph {
                    location: format!("edges[{k}]"),
                    message: "endpoint out of range".into(),
                });
            }
            if s == t {
                warnings.push(format!("edges[{k}]: self-loop on '{}' dropped", nodes[s].id));
                continue;
            }
            let key = (s.min(t), s.max(t));
            if !seen.insert(key) {
                warnings.push(format!(
                    "edges[{k}]: duplicate edge '{}'-'{}' collapsed",
                    nodes[s].id, nodes[t].id
                ));
                continue;
            }
            kept.push(Edge { source: s, target: t, weight: w });
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &kept {
            adjacency[e.source].push(e.target);
            adjacency[e.target].push(e.source);
        }
        for a in &mut adjacency {
            a.sort_unstable();
        }
        let mut order: Vec<NodeIx> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| nodes[a].id.cmp(&nodes[b].id));
        let mut id_rank = vec![0; nodes.len()];
        for (r, &i) in order.iter().enumerate() {
            id_rank[i] = r;
        }
        Ok((
            Self { name: name.into(), nodes, edges: kept, index, adjacency, id_rank },
            warnings,
        ))
    }

    /// Convenience constructor used by tests and generators: unattributed
    /// nodes named by the given ids, unit-weight edges between them.
    pub fn from_edge_list(name: &str, ids: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let nodes = ids
            .iter()
            .map(|id| Node {
                id: (*id).to_string(),
                categorical: BTreeMap::new(),
                numerical: BTreeMap::new(),
            })
            .collect::<Vec<_>>();
        let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut list = Vec::with_capacity(edges.len());
        for (s, t) in edges {
            let s = *pos.get(s).ok_or_else(|| Error::UnknownNode((*s).into()))?;
            let t = *pos.get(t).ok_or_else(|| Error::UnknownNode((*t).into()))?;
            list.push((s, t, 1.0));
        }
        Ok(Self::from_parts(name, nodes, list)?.0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, ix: NodeIx) -> &Node {
        &self.nodes[ix]
    }

    pub fn id(&self, ix: NodeIx) -> &str {
        &self.nodes[ix].id
    }

    pub fn lookup(&self, id: &str) -> Option<NodeIx> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, ix: NodeIx) -> &[NodeIx] {
        &self.adjacency[ix]
    }

    pub fn degree(&self, ix: NodeIx) -> usize {
        self.adjacency[ix].len()
    }

    pub fn has_edge(&self, a: NodeIx, b: NodeIx) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Position of the node in the lexicographic order of ids.
    pub fn id_rank(&self, ix: NodeIx) -> usize {
        self.id_rank[ix]
    }

    pub fn all_nodes(&self) -> Vec<NodeIx> {
        (0..self.nodes.len()).collect()
    }

    /// Number of edges with both endpoints in `scope` (sorted node list).
    pub fn induced_edge_count(&self, scope: &[NodeIx]) -> usize {
        let mask = self.mask(scope);
        self.edges.iter().filter(|e| mask[e.source] && mask[e.target]).count()
    }

    pub(crate) fn mask(&self, scope: &[NodeIx]) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for &v in scope {
            mask[v] = true;
        }
        mask
    }

    /// Names of categorical attributes present on at least one node.
    pub fn categorical_attributes(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.nodes.iter().flat_map(|n| n.categorical.keys()).collect();
        set.into_iter().cloned().collect()
    }

    pub fn numerical_attributes(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.nodes.iter().flat_map(|n| n.numerical.keys()).collect();
        set.into_iter().cloned().collect()
    }

    /// Distinct values of a categorical attribute, sorted.
    pub fn categories(&self, attribute: &str) -> Vec<String> {
        let set: BTreeSet<&String> =
            self.nodes.iter().filter_map(|n| n.categorical.get(attribute)).collect();
        set.into_iter().cloned().collect()
    }
}

/// Parses the graph JSON document. Normalization warnings are logged.
pub fn parse_graph(document: &str) -> Result<Graph> {
    let (graph, warnings) = parse_graph_with_warnings(document)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(graph)
}

pub fn parse_graph_with_warnings(document: &str) -> Result<(Graph, Vec<String>)> {
    let root: Value = serde_json::from_str(document).map_err(|e| Error::Malformed(e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Malformed("top-level value must be an object".into()))?;
    let name = match obj.get("name") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(invalid("name", "must be a string")),
    };
    let raw_nodes = obj
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("nodes", "missing or not an array"))?;
    if raw_nodes.is_empty() {
        return Err(Error::EmptyGraph);
    }

    // First pass: ids and raw attribute values.
    let mut ids = Vec::with_capacity(raw_nodes.len());
    let mut raw_attrs: Vec<Vec<(String, AttrValue)>> = Vec::with_capacity(raw_nodes.len());
    for (i, n) in raw_nodes.iter().enumerate() {
        let loc = format!("nodes[{i}]");
        let o = n.as_object().ok_or_else(|| invalid(&loc, "node must be an object"))?;
        let id = match o.get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(x)) => x.to_string(),
            _ => return Err(invalid(&loc, "missing string id")),
        };
        let mut attrs = Vec::new();
        for (k, v) in o {
            if k == "id" {
                continue;
            }
            let value = match v {
                Value::Null => continue,
                Value::Number(x) => AttrValue::Number(x.as_f64().unwrap_or(f64::NAN)),
                Value::String(s) => match s.trim().parse::<f64>() {
                    Ok(x) if x.is_finite() => AttrValue::Number(x),
                    _ => AttrValue::Text(s.clone()),
                },
                Value::Bool(b) => AttrValue::Text(b.to_string()),
                _ => return Err(invalid(&format!("{loc}.{k}"), "attribute must be a scalar")),
            };
            attrs.push((k.clone(), value));
        }
        ids.push(id);
        raw_attrs.push(attrs);
    }
    // An attribute is numerical only if every node carrying it holds a number.
    let mut textual: BTreeSet<String> = BTreeSet::new();
    for attrs in &raw_attrs {
        for (k, v) in attrs {
            if matches!(v, AttrValue::Text(_)) {
                textual.insert(k.clone());
            }
        }
    }
    let nodes = ids
        .into_iter()
        .zip(raw_attrs)
        .map(|(id, attrs)| {
            let mut categorical = BTreeMap::new();
            let mut numerical = BTreeMap::new();
            for (k, v) in attrs {
                match v {
                    AttrValue::Number(x) if !textual.contains(&k) => {
                        numerical.insert(k, x);
                    }
                    AttrValue::Number(x) => {
                        categorical.insert(k, format_number(x));
                    }
                    AttrValue::Text(s) => {
                        categorical.insert(k, s);
                    }
                }
            }
            Node { id, categorical, numerical }
        })
        .collect::<Vec<_>>();

    let mut index = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        if index.insert(n.id.as_str(), i).is_some() {
            return Err(invalid(&format!("nodes[{i}]"), &format!("duplicate node id '{}'", n.id)));
        }
    }
    let raw_edges = match obj.get("edges") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(a)) => a.clone(),
        Some(_) => return Err(invalid("edges", "must be an array")),
    };
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (k, e) in raw_edges.iter().enumerate() {
        let loc = format!("edges[{k}]");
        let o = e.as_object().ok_or_else(|| invalid(&loc, "edge must be an object"))?;
        let endpoint = |field: &str| -> Result<NodeIx> {
            let id = match o.get(field) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(x)) => x.to_string(),
                _ => return Err(invalid(&loc, &format!("missing {field}"))),
            };
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| invalid(&loc, &format!("dangling {field} '{id}'")))
        };
        let s = endpoint("source")?;
        let t = endpoint("target")?;
        let w = match o.get("weight") {
            None | Some(Value::Null) => 1.0,
            Some(Value::Number(x)) => {
                let w = x.as_f64().unwrap_or(f64::NAN);
                if !(w > 0.0 && w.is_finite()) {
                    return Err(invalid(&loc, "weight must be a positive number"));
                }
                w
            }
            Some(_) => return Err(invalid(&loc, "weight must be a positive number")),
        };
        edges.push((s, t, w));
    }
    Graph::from_parts(name, nodes, edges)
}

enum AttrValue {
    Number(f64),
    Text(String),
}

fn invalid(location: &str, message: &str) -> Error {
    Error::InvalidGraph { location: location.to_string(), message: message.to_string() }
}

fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_attributes_by_kind() {
        let doc = r#"{"name":"toy","nodes":[
            {"id":"a","country":"China","citations":"12"},
            {"id":"b","country":"Japan","citations":3.5}],
            "edges":[{"source":"a","target":"b","weight":2}]}"#;
        let g = parse_graph(doc).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.node(0).categorical["country"], "China");
        assert_eq!(g.node(0).numerical["citations"], 12.0);
        assert_eq!(g.node(1).numerical["citations"], 3.5);
        assert_eq!(g.edges()[0].weight, 2.0);
    }

    #[test]
    fn mixed_attribute_becomes_categorical() {
        let doc = r#"{"name":"t","nodes":[{"id":"a","g":"1"},{"id":"b","g":"x"}],"edges":[]}"#;
        let g = parse_graph(doc).unwrap();
        assert_eq!(g.node(0).categorical["g"], "1");
        assert!(g.node(0).numerical.is_empty());
    }

    #[test]
    fn normalizes_loops_and_duplicates() {
        let doc = r#"{"name":"t","nodes":[{"id":"a"},{"id":"b"}],"edges":[
            {"source":"a","target":"b"},{"source":"b","target":"a"},{"source":"a","target":"a"}]}"#;
        let (g, warnings) = parse_graph_with_warnings(doc).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(warnings.len(), 2);
        assert!(warnings[1].contains("self-loop"));
    }

    #[test]
    fn empty_node_list_is_rejected() {
        let err = parse_graph(r#"{"name":"t","nodes":[],"edges":[]}"#).unwrap_err();
        assert_eq!(err.to_string(), "graph must contain at least one node");
    }

    #[test]
    fn errors_carry_location() {
        let dangling = r#"{"nodes":[{"id":"a"}],"edges":[{"source":"a","target":"zz"}]}"#;
        let err = parse_graph(dangling).unwrap_err().to_string();
        assert!(err.contains("edges[0]") && err.contains("zz"), "{err}");

        let dup = r#"{"nodes":[{"id":"a"},{"id":"a"}],"edges":[]}"#;
        let err = parse_graph(dup).unwrap_err().to_string();
        assert!(err.contains("nodes[1]") && err.contains("duplicate"), "{err}");

        let err = parse_graph("{\"nodes\": [").unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn rejects_non_positive_weight() {
        let doc = r#"{"nodes":[{"id":"a"},{"id":"b"}],"edges":[{"source":"a","target":"b","weight":0}]}"#;
        assert!(parse_graph(doc).is_err());
    }
}
