//! Graph model checked against independent oracles: union-find components,
//! exhaustive modularity search, dense PageRank and brute-force degrees.

use std::collections::BTreeSet;

use calliope_core::graph::{
    community_features, connected_components, greedy_modularity, node_features, parse_graph, FeatureValue,
    Graph, Measure, Node,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lesmis() -> Graph {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/lesmis.json")).unwrap();
    parse_graph(&text).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let nodes = (0..n)
        .map(|i| Node { id: format!("n{i:02}"), categorical: Default::default(), numerical: Default::default() })
        .collect();
    let mut edges = vec![];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::from_parts("random", nodes, edges).unwrap().0
}

fn union_find_components(g: &Graph) -> BTreeSet<Vec<usize>> {
    let mut parent: Vec<usize> = (0..g.node_count()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for e in g.edges() {
        let (a, b) = (find(&mut parent, e.source), find(&mut parent, e.target));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups = std::collections::BTreeMap::<usize, Vec<usize>>::new();
    for v in 0..g.node_count() {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    groups.into_values().collect()
}

fn partition_sets(p: &calliope_core::graph::Partition) -> BTreeSet<Vec<usize>> {
    p.communities.iter().map(|c| c.members.clone()).collect()
}

fn modularity(g: &Graph, labels: &[usize]) -> f64 {
    let m = g.edge_count() as f64;
    let mut q = 0.0;
    for i in 0..g.node_count() {
        for j in 0..g.node_count() {
            if labels[i] != labels[j] {
                continue;
            }
            let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
            q += a - g.degree(i) as f64 * g.degree(j) as f64 / (2.0 * m);
        }
    }
    q / (2.0 * m)
}

/// Every set partition of n elements as restricted-growth strings.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..=max + 1 {
            cur.push(l);
            rec(i + 1, n, cur, max.max(l), out);
            cur.pop();
        }
    }
    let mut out = vec![];
    let mut cur = vec![0];
    rec(1, n, &mut cur, 0, &mut out);
    out
}

#[test]
fn lesmis_dimensions() {
    let g = lesmis();
    assert_eq!((g.node_count(), g.edge_count()), (77, 254));
}

#[test]
fn lesmis_components_match_union_find() {
    let g = lesmis();
    let p = connected_components(&g, &g.all_nodes()).unwrap();
    assert_eq!(partition_sets(&p), union_find_components(&g));
    assert_eq!(p.communities.len(), 1);
}

#[test]
fn components_agree_with_union_find_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.random_range(1..=20);
        let p = rng.random_range(0.0..0.3);
        let g = random_graph(&mut rng, n, p);
        let part = connected_components(&g, &g.all_nodes()).unwrap();
        assert_eq!(partition_sets(&part), union_find_components(&g));
    }
}

#[test]
fn greedy_modularity_matches_exhaustive_optimum_on_barbell() {
    let g = Graph::from_edge_list(
        "barbell",
        &["a", "b", "c", "d", "e", "f"],
        &[("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f"), ("c", "d")],
    )
    .unwrap();
    let best = set_partitions(6)
        .into_iter()
        .max_by(|a, b| modularity(&g, a).total_cmp(&modularity(&g, b)))
        .unwrap();
    let mut expected: BTreeSet<Vec<usize>> = BTreeSet::new();
    for l in 0..=*best.iter().max().unwrap() {
        expected.insert((0..6).filter(|&v| best[v] == l).collect());
    }
    let p = greedy_modularity(&g, &g.all_nodes()).unwrap();
    assert_eq!(partition_sets(&p), expected);
}

#[test]
fn no_split_of_k4_improves_modularity() {
    let ids = ["a", "b", "c", "d"];
    let edges: Vec<(&str, &str)> =
        (0..4).flat_map(|i| (i + 1..4).map(move |j| (ids[i], ids[j]))).collect();
    let g = Graph::from_edge_list("k4", &ids, &edges).unwrap();
    let whole = modularity(&g, &[0, 0, 0, 0]);
    for labels in set_partitions(4) {
        assert!(modularity(&g, &labels) <= whole + 1e-12);
    }
    assert_eq!(greedy_modularity(&g, &g.all_nodes()).unwrap().communities.len(), 1);
}

#[test]
fn lesmis_largest_community() {
    let g = lesmis();
    let t = std::time::Instant::now();
    let p = greedy_modularity(&g, &g.all_nodes()).unwrap();
    assert!(t.elapsed().as_secs_f64() < 1.0);
    let largest = p.communities[0].members.len();
    assert!((24..=28).contains(&largest), "largest community {largest}");
    assert!(p.communities[0].members.contains(&g.lookup("Valjean").unwrap()));
}

fn dense_pagerank(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = g.degree(j);
        for i in 0..n {
            m[i][j] = if d == 0 { 1.0 / n as f64 } else if g.has_edge(i, j) { 1.0 / d as f64 } else { 0.0 };
        }
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..5000 {
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = 0.15 / n as f64 + 0.85 * (0..n).map(|j| m[i][j] * x[j]).sum::<f64>();
        }
        x = y;
    }
    x
}

#[test]
fn path_pagerank_matches_dense_power_iteration() {
    let g = Graph::from_edge_list("p5", &["a", "b", "c", "d", "e"], &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")]).unwrap();
    let f = node_features(&g, &g.all_nodes()).unwrap();
    let got = f[&Measure::PageRank].finite_values().unwrap();
    for (a, b) in got.iter().zip(dense_pagerank(&g)) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn features_are_bit_identical_across_runs() {
    let g = lesmis();
    let a = node_features(&g, &g.all_nodes()).unwrap();
    let b = node_features(&g, &g.all_nodes()).unwrap();
    assert_eq!(a, b);
    let p = greedy_modularity(&g, &g.all_nodes()).unwrap();
    assert_eq!(community_features(&g, &p).unwrap(), community_features(&g, &p).unwrap());
}

#[test]
fn lesmis_inside_edge_share() {
    // The cohesive community's inside edges as a share of all inside edges.
    let g = lesmis();
    let p = greedy_modularity(&g, &g.all_nodes()).unwrap();
    let f = community_features(&g, &p).unwrap();
    let inside = f[&Measure::InsideEdges].finite_values().unwrap();
    let total: f64 = inside.iter().sum();
    let best = inside.iter().cloned().fold(0.0, f64::max);
    assert!((best / total * 100.0 - 35.48).abs() < 2.0, "{}", best / total);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feature_invariants(seed in 0u64..10_000, n in 2usize..25, p in 0.05f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, p);
        let f = node_features(&g, &g.all_nodes()).unwrap();
        let pr = f[&Measure::PageRank].finite_values().unwrap();
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(pr.iter().all(|&x| x >= 0.0));
        let deg = f[&Measure::Degree].finite_values().unwrap();
        for v in 0..n {
            let brute = g.edges().iter().filter(|e| e.source == v || e.target == v).count();
            prop_assert_eq!(deg[v], brute as f64);
        }
        let regular = (0..n).all(|v| g.degree(v) == g.degree(0));
        if regular {
            for &x in &pr {
                prop_assert!((x - 1.0 / n as f64).abs() < 1e-8);
            }
        }
        if g.edge_count() > 0 {
            let part = greedy_modularity(&g, &g.all_nodes()).unwrap();
            let mut union: Vec<usize> = part.communities.iter().flat_map(|c| c.members.clone()).collect();
            union.sort_unstable();
            prop_assert_eq!(union, g.all_nodes());
            let cf = community_features(&g, &part).unwrap();
            for m in [Measure::Density, Measure::TriangleParticipation, Measure::Conductance] {
                for v in cf[&m].finite_values().unwrap() {
                    prop_assert!((0.0..=1.0).contains(&v), "{} = {}", m, v);
                }
            }
            let max_odf = cf[&Measure::MaxOdf].finite_values().unwrap();
            let avg_odf = cf[&Measure::AvgOdf].finite_values().unwrap();
            for (a, b) in max_odf.iter().zip(&avg_odf) {
                prop_assert!(a >= b);
            }
            for v in &cf[&Measure::Separability].values {
                if let FeatureValue::Finite(x) = v {
                    prop_assert!(*x >= 0.0);
                }
            }
        }
    }
}
