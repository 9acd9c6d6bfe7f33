//! Narrative organization: topic skeletons, UCB skeleton selection and
//! greedy expansion maximizing the fact, diversity and coverage rewards.

mod bandit;
mod expand;
mod relation;
mod reward;
mod skeleton;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::facts::{DiscoveryConfig, GraphFact};
use crate::graph::{Graph, PartitionMethod};

pub use bandit::{select_arm, BanditState};
pub use expand::{expand_narrative, expand_with_trace, explore};
pub use relation::{classify_relation, relation_cost, Logical, Relation, Topological};
pub use reward::{narrative_reward, Rewards};
pub use skeleton::{build_skeletons, TopicSkeleton};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Topic {
    ExploringLocalNeighbors,
    DetectingKeyPlayers,
    AllianceAndOpposition,
    RevealingHiddenTies,
}

impl Topic {
    pub const ALL: [Topic; 4] = [
        Topic::ExploringLocalNeighbors,
        Topic::DetectingKeyPlayers,
        Topic::AllianceAndOpposition,
        Topic::RevealingHiddenTies,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            Topic::ExploringLocalNeighbors => "local-neighbors",
            Topic::DetectingKeyPlayers => "key-players",
            Topic::AllianceAndOpposition => "alliance-opposition",
            Topic::RevealingHiddenTies => "hidden-ties",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Topic::ExploringLocalNeighbors => "Exploring Local Neighbors",
            Topic::DetectingKeyPlayers => "Detecting Key Players",
            Topic::AllianceAndOpposition => "Alliance and Opposition",
            Topic::RevealingHiddenTies => "Revealing Hidden Ties",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl std::str::FromStr for Topic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Topic::ALL
            .into_iter()
            .find(|t| {
                let slug: String = t.slug().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
                let full = format!("{t:?}").to_ascii_lowercase();
                norm == slug || norm == full
            })
            .ok_or_else(|| Error::UnknownTopic(s.to_string()))
    }
}

/// Parameters of narrative expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpansionConfig {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Transition prior p(r) per logical relation; absent relations have 0.
    pub priors: BTreeMap<Logical, f64>,
    /// Only the best `candidate_cap` facts of the pool are considered.
    pub candidate_cap: usize,
    /// Largest narrative, in facts.
    pub max_facts: usize,
    /// Rank candidates by gain / (1 + relation cost) instead of raw gain.
    pub cost_aware: bool,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 1.0,
            priors: [
                (Logical::Elaboration, 0.35),
                (Logical::Similarity, 0.25),
                (Logical::Generalization, 0.20),
                (Logical::Contrast, 0.20),
            ]
            .into(),
            candidate_cap: 500,
            max_facts: 8,
            cost_aware: false,
        }
    }
}

impl ExpansionConfig {
    pub fn prior(&self, r: Logical) -> f64 {
        self.priors.get(&r).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return Err(Error::Config("cost weights must be positive".into()));
        }
        let total: f64 = self.priors.values().sum();
        if (total - 1.0).abs() > 1e-9 || self.priors.values().any(|&p| p < 0.0) {
            return Err(Error::Config("transition priors must be non-negative and sum to 1".into()));
        }
        if self.max_facts == 0 {
            return Err(Error::Config("narrative size cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrganizeConfig {
    pub expansion: ExpansionConfig,
    /// Total bandit pulls.
    pub budget: usize,
    /// Candidates sampled per step of a random exploration.
    pub explore_sample: usize,
    /// Central-node candidates per measure for local neighbourhoods.
    pub central_candidates: usize,
    /// Partition used to find the community pair of hidden ties.
    pub tie_partition: PartitionMethod,
    pub seed: u64,
}

impl Default for OrganizeConfig {
    fn default() -> Self {
        Self {
            expansion: ExpansionConfig::default(),
            budget: 200,
            explore_sample: 5,
            central_candidates: 5,
            tie_partition: PartitionMethod::GreedyModularity,
            seed: 0,
        }
    }
}

/// A tree of facts rooted at a topic skeleton. `facts[0]` is the root and
/// `relations[i]` introduces `facts[i + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Narrative {
    pub topic: Topic,
    pub variant: String,
    pub parameters: BTreeMap<String, String>,
    pub facts: Vec<GraphFact>,
    pub relations: Vec<Relation>,
    /// Number of leading facts that came from the skeleton.
    pub skeleton_len: usize,
    pub order: Vec<String>,
    pub rewards: Rewards,
    pub seed: u64,
}

impl Narrative {
    pub fn from_skeleton(sk: &TopicSkeleton, g: &Graph) -> Self {
        let mut facts = vec![sk.root.clone()];
        let mut relations = vec![];
        for (f, r) in &sk.evidence {
            if facts.iter().all(|x| x.id != f.id) {
                facts.push(f.clone());
                relations.push(r.clone());
            }
        }
        let mut n = Narrative {
            topic: sk.topic,
            variant: sk.variant.clone(),
            parameters: sk.parameters.clone(),
            skeleton_len: facts.len(),
            facts,
            relations,
            order: vec![],
            rewards: Rewards { F: 0.0, D: 0.0, I: 0.0, R: 0.0 },
            seed: 0,
        };
        n.refresh(g);
        n
    }

    pub fn root(&self) -> &GraphFact {
        &self.facts[0]
    }

    pub fn contains(&self, id: &str) -> bool {
        self.facts.iter().any(|f| f.id == id)
    }

    pub fn fact(&self, id: &str) -> Option<&GraphFact> {
        self.facts.iter().find(|f| f.id == id)
    }

    /// Relation introducing fact `id`, if it is not the root.
    pub fn relation_to(&self, id: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.successor == id)
    }

    /// Recomputes rewards and reading order.
    pub fn refresh(&mut self, g: &Graph) {
        self.rewards = narrative_reward(&self.facts, g);
        self.order = linearize(self);
    }

    /// Adds `fact` under the tree fact it relates to at the lowest cost
    /// (the root when nothing relates).
    pub fn add_fact(&mut self, fact: GraphFact, g: &Graph, cfg: &ExpansionConfig) -> Result<()> {
        if self.contains(&fact.id) {
            return Ok(());
        }
        let mut best: Option<Relation> = None;
        for t in &self.facts {
            let r = Relation::between(t, &fact, g, cfg);
            if r.is_related() && best.as_ref().is_none_or(|b| r.cost < b.cost) {
                best = Some(r);
            }
        }
        let rel = best.unwrap_or_else(|| Relation::between(&self.facts[0], &fact, g, cfg));
        self.facts.push(fact);
        self.relations.push(rel);
        self.refresh(g);
        Ok(())
    }

    /// Removes a non-root fact; its children move up to its parent.
    pub fn remove_fact(&mut self, id: &str, g: &Graph, cfg: &ExpansionConfig) -> Result<()> {
        let ix = self.facts.iter().position(|f| f.id == id).ok_or_else(|| Error::UnknownFact(id.to_string()))?;
        if ix == 0 {
            return Err(Error::RemoveRoot);
        }
        let parent_id = self.relations[ix - 1].predecessor.clone();
        self.facts.remove(ix);
        self.relations.remove(ix - 1);
        if ix < self.skeleton_len {
            self.skeleton_len -= 1;
        }
        let parent = self.facts.iter().find(|f| f.id == parent_id).cloned().expect("parent in tree");
        for i in 0..self.relations.len() {
            if self.relations[i].predecessor == id {
                self.relations[i] = Relation::between(&parent, &self.facts[i + 1], g, cfg);
            }
        }
        self.refresh(g);
        Ok(())
    }

    /// Replaces the reading order with a permutation of the narrative's
    /// facts. The tree is unchanged.
    pub fn reorder(&mut self, order: Vec<String>) -> Result<()> {
        let mut a = order.clone();
        let mut b = self.order.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::Config("reorder must be a permutation of the narrative facts".into()));
        }
        self.order = order;
        Ok(())
    }
}

/// Depth-first reading order: root first, children by descending score
/// (insertion order on ties).
pub fn linearize(n: &Narrative) -> Vec<String> {
    let mut children: Vec<Vec<usize>> = vec![vec![]; n.facts.len()];
    for (i, r) in n.relations.iter().enumerate() {
        let parent = n.facts.iter().position(|f| f.id == r.predecessor).unwrap_or(0);
        children[parent].push(i + 1);
    }
    for c in &mut children {
        c.sort_by(|&a, &b| n.facts[b].score.total_cmp(&n.facts[a].score));
    }
    let mut out = Vec::with_capacity(n.facts.len());
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        out.push(n.facts[v].id.clone());
        for &c in children[v].iter().rev() {
            stack.push(c);
        }
    }
    out
}

/// Builds the skeletons of `topic` (or every feasible topic), selects one
/// with the bandit and expands it into the final narrative.
pub fn organize(
    g: &Graph,
    pool: &[GraphFact],
    topic: Option<Topic>,
    dcfg: &DiscoveryConfig,
    cfg: &OrganizeConfig,
) -> Result<(Narrative, BanditState)> {
    cfg.expansion.validate()?;
    if pool.is_empty() {
        return Err(Error::EmptyFactPool);
    }
    let skeletons = match topic {
        Some(t) => build_skeletons(g, pool, t, dcfg, cfg)?,
        None => Topic::ALL.iter().filter_map(|&t| build_skeletons(g, pool, t, dcfg, cfg).ok()).flatten().collect(),
    };
    if skeletons.is_empty() {
        return Err(Error::NoSkeletons);
    }
    let (best, state) = select_arm(skeletons.len(), cfg.budget, cfg.seed, |arm, rng| {
        explore(&skeletons[arm], pool, g, &cfg.expansion, cfg.explore_sample, rng)
    })?;
    let mut narrative = expand_narrative(&skeletons[best], pool, g, &cfg.expansion);
    narrative.seed = cfg.seed;
    Ok((narrative, state))
}
