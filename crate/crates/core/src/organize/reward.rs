use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::facts::{FactType, GraphFact};
use crate::graph::{Component, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Rewards {
    pub F: f64,
    pub D: f64,
    pub I: f64,
    pub R: f64,
}

fn component_key(c: &Component) -> Vec<usize> {
    match c {
        Component::Node(v) => vec![*v],
        Component::Community { members, .. } => {
            let mut k = vec![usize::MAX];
            k.extend(members);
            k
        }
    }
}

/// Fact set, diversity and coverage rewards of a set of facts.
///
/// Diversity is the conditional entropy of fact type given focus, counting
/// one event per focus component (focus-less facts share one empty focus).
pub fn narrative_reward<'a>(facts: impl IntoIterator<Item = &'a GraphFact>, g: &Graph) -> Rewards {
    let mut f = 0.0;
    let mut joint: BTreeMap<(Vec<usize>, FactType), usize> = BTreeMap::new();
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for fact in facts {
        f += fact.score;
        if fact.focus.is_empty() {
            *joint.entry((vec![], fact.fact_type)).or_default() += 1;
        }
        for c in &fact.focus {
            *joint.entry((component_key(c), fact.fact_type)).or_default() += 1;
            covered.extend(c.vertices());
        }
    }
    let total: usize = joint.values().sum();
    let mut marginal: BTreeMap<&Vec<usize>, usize> = BTreeMap::new();
    for ((focus, _), n) in &joint {
        *marginal.entry(focus).or_default() += n;
    }
    let mut d = 0.0;
    if total > 0 {
        let t = total as f64;
        for ((focus, _), &n) in &joint {
            let p_joint = n as f64 / t;
            let p_focus = marginal[focus] as f64 / t;
            d -= p_joint * (p_joint / p_focus).ln();
        }
    }
    let d = d.max(0.0);
    let i = covered.len() as f64 / g.node_count() as f64;
    Rewards { F: f, D: d, I: i, R: f + d + i }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Measure, PartitionMethod};
    use approx::assert_abs_diff_eq;

    fn fact(t: FactType, focus: Vec<Component>, score: f64) -> GraphFact {
        GraphFact {
            id: format!("{t}{score}"),
            fact_type: t,
            subgraph: vec![],
            partition: PartitionMethod::None,
            measure: Measure::Degree,
            focus,
            impact: 1.0,
            interestingness: score,
            score,
            scope: vec![0, 1, 2],
            focus_values: vec![],
            values: vec![],
        }
    }

    fn path() -> Graph {
        Graph::from_edge_list("p", &["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap()
    }

    #[test]
    fn single_fact_has_zero_diversity() {
        let r = narrative_reward([&fact(FactType::Extreme, vec![Component::Node(1)], 0.5)], &path());
        assert_eq!(r.D, 0.0);
        assert_abs_diff_eq!(r.I, 1.0 / 3.0);
        assert_abs_diff_eq!(r.R, 0.5 + 1.0 / 3.0);
    }

    #[test]
    fn two_types_on_one_focus_give_ln2() {
        let a = fact(FactType::Extreme, vec![Component::Node(1)], 0.5);
        let b = fact(FactType::Outlier, vec![Component::Node(1)], 0.25);
        let r = narrative_reward([&a, &b], &path());
        assert_abs_diff_eq!(r.D, std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(r.F, 0.75);
    }

    #[test]
    fn full_cover_gives_unit_coverage() {
        let a = fact(FactType::Proportion, vec![Component::Community { id: 0, members: vec![0, 1, 2] }], 0.1);
        assert_eq!(narrative_reward([&a], &path()).I, 1.0);
    }
}
