use std::collections::BTreeMap;

use rand::seq::IteratorRandom;
use rand_chacha::ChaCha8Rng;

use super::{narrative_reward, ExpansionConfig, Narrative, Relation, TopicSkeleton};
use crate::facts::GraphFact;
use crate::graph::Graph;

/// Candidate relations keyed by pool index; each unused fact keeps the
/// cheapest relation from a tree fact (earliest tree fact on ties).
struct Candidates {
    best: BTreeMap<usize, Relation>,
}

impl Candidates {
    fn new(n: &Narrative, pool: &[GraphFact], g: &Graph, cfg: &ExpansionConfig) -> Self {
        let mut c = Candidates { best: BTreeMap::new() };
        for t in &n.facts {
            c.relate(t, n, pool, g, cfg);
        }
        c
    }

    fn relate(&mut self, tree_fact: &GraphFact, n: &Narrative, pool: &[GraphFact], g: &Graph, cfg: &ExpansionConfig) {
        for (i, f) in pool.iter().enumerate().take(cfg.candidate_cap) {
            if n.contains(&f.id) {
                continue;
            }
            let r = Relation::between(tree_fact, f, g, cfg);
            if !r.is_related() {
                continue;
            }
            match self.best.get(&i) {
                Some(old) if old.cost <= r.cost => {}
                _ => {
                    self.best.insert(i, r);
                }
            }
        }
    }
}

fn gain(n: &Narrative, f: &GraphFact, g: &Graph) -> f64 {
    narrative_reward(n.facts.iter().chain(std::iter::once(f)), g).R - n.rewards.R
}

fn accept(n: &mut Narrative, cands: &mut Candidates, ix: usize, pool: &[GraphFact], g: &Graph, cfg: &ExpansionConfig) {
    let rel = cands.best.remove(&ix).expect("candidate present");
    let fact = pool[ix].clone();
    n.facts.push(fact.clone());
    n.relations.push(rel);
    n.rewards = narrative_reward(&n.facts, g);
    cands.best.retain(|&i, _| pool[i].id != fact.id);
    cands.relate(&fact, n, pool, g, cfg);
}

/// Picks the candidate with the largest positive gain among `eligible`, in
/// the given order on ties. Returns the pool index.
fn best_candidate(
    n: &Narrative,
    cands: &Candidates,
    eligible: impl Iterator<Item = usize>,
    pool: &[GraphFact],
    g: &Graph,
    cfg: &ExpansionConfig,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in eligible {
        let raw = gain(n, &pool[i], g);
        if raw <= 0.0 {
            continue;
        }
        let key = if cfg.cost_aware { raw / (1.0 + cands.best[&i].cost) } else { raw };
        if best.is_none_or(|(_, b)| key > b) {
            best = Some((i, key));
        }
    }
    best.map(|(i, _)| i)
}

/// Greedy expansion: repeatedly adds the related fact with the largest
/// positive reward gain until no gain is positive or the size cap is hit.
/// Returns the narrative and its reward after each step (skeleton first).
pub fn expand_with_trace(sk: &TopicSkeleton, pool: &[GraphFact], g: &Graph, cfg: &ExpansionConfig) -> (Narrative, Vec<f64>) {
    let mut n = Narrative::from_skeleton(sk, g);
    let mut cands = Candidates::new(&n, pool, g, cfg);
    let mut trace = vec![n.rewards.R];
    while n.facts.len() < cfg.max_facts {
        let keys: Vec<usize> = cands.best.keys().copied().collect();
        let Some(ix) = best_candidate(&n, &cands, keys.into_iter(), pool, g, cfg) else { break };
        accept(&mut n, &mut cands, ix, pool, g, cfg);
        trace.push(n.rewards.R);
    }
    n.refresh(g);
    (n, trace)
}

pub fn expand_narrative(sk: &TopicSkeleton, pool: &[GraphFact], g: &Graph, cfg: &ExpansionConfig) -> Narrative {
    expand_with_trace(sk, pool, g, cfg).0
}

/// Randomized expansion used as a bandit pull: each step considers a
/// random subset of at most `sample` candidates. Returns the final reward.
pub fn explore(
    sk: &TopicSkeleton,
    pool: &[GraphFact],
    g: &Graph,
    cfg: &ExpansionConfig,
    sample: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut n = Narrative::from_skeleton(sk, g);
    let mut cands = Candidates::new(&n, pool, g, cfg);
    while n.facts.len() < cfg.max_facts && !cands.best.is_empty() {
        let mut picked = cands.best.keys().copied().choose_multiple(rng, sample.max(1));
        picked.sort_unstable();
        let Some(ix) = best_candidate(&n, &cands, picked.into_iter(), pool, g, cfg) else { break };
        accept(&mut n, &mut cands, ix, pool, g, cfg);
    }
    n.rewards.R
}
