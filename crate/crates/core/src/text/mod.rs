//! Template-based annotation and summary text.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::facts::{FactType, Filter, GraphFact};
use crate::graph::{Component, Graph, Level, Measure, PartitionMethod};
use crate::organize::{Logical, Narrative};

const DEFAULT_TEMPLATES: &str = include_str!("../../templates/default.txt");
const SLOTS: [&str; 6] = ["Focus", "Measure", "MeasureTranslation", "Partition", "Value", "Subgraph"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Node,
    Community,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Highest,
    Lowest,
}

/// Plain-language phrase for a measure, or the literal measure name when
/// no phrase exists for the combination.
pub fn translate_measure(measure: &Measure, role: Role, polarity: Polarity) -> String {
    translation(measure, role, polarity).map(str::to_string).unwrap_or_else(|| measure.display_name())
}

fn translation(measure: &Measure, role: Role, polarity: Polarity) -> Option<&'static str> {
    if polarity == Polarity::Lowest {
        return None;
    }
    match (role, measure) {
        (Role::Node, Measure::Degree) => Some("a super connector"),
        (Role::Node, Measure::PageRank) => Some("an important node because it has many connections and important neighbors"),
        (Role::Node, Measure::Eigenvector) => {
            Some("an influential node while considering both direct and indirect connections")
        }
        (Role::Community, Measure::InsideEdges) => Some("having a close internal relationship"),
        (Role::Community, Measure::Density | Measure::AverageDegree) => Some("highly connected"),
        (Role::Community, Measure::AvgOdf | Measure::MaxOdf) => Some("having strong external connectivity"),
        (Role::Community, Measure::Separability) => Some("an isolated community with scarce external connections"),
        _ => None,
    }
}

/// Annotation patterns keyed by fact type, with optional `.variant`
/// suffixes.
#[derive(Debug, Clone, PartialEq)]
pub struct Templates {
    patterns: BTreeMap<String, String>,
}

impl Default for Templates {
    fn default() -> Self {
        Templates::parse(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }
}

impl Templates {
    /// Parses "factType | pattern" lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut patterns = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, pattern) =
                line.split_once('|').ok_or_else(|| Error::Template(format!("line {}: expected 'factType | pattern'", no + 1)))?;
            let key = key.trim();
            let base = key.split('.').next().unwrap_or(key);
            let fact_type: FactType =
                base.parse().map_err(|_| Error::Template(format!("line {}: unknown fact type '{base}'", no + 1)))?;
            let pattern = pattern.trim().to_string();
            for slot in slots_in(&pattern) {
                if !SLOTS.contains(&slot.as_str()) {
                    return Err(Error::Template(format!("line {}: unknown slot {{{slot}}}", no + 1)));
                }
                if slot == "Focus" && !fact_type.has_focus() {
                    return Err(Error::Template(format!("line {}: {fact_type} facts have no focus", no + 1)));
                }
            }
            patterns.insert(format!("{fact_type}{}", &key[base.len()..]), pattern);
        }
        for t in FactType::ALL {
            if !patterns.contains_key(&t.to_string()) {
                return Err(Error::Template(format!("missing template for {t}")));
            }
        }
        Ok(Templates { patterns })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Template(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn get(&self, fact_type: FactType, variant: Option<&str>) -> &str {
        let base = fact_type.to_string();
        variant
            .and_then(|v| self.patterns.get(&format!("{base}.{v}")))
            .or_else(|| self.patterns.get(&base))
            .map(String::as_str)
            .expect("validated at parse time")
    }
}

fn slots_in(pattern: &str) -> Vec<String> {
    let mut out = vec![];
    let mut rest = pattern;
    while let Some(start) = rest.find('{') {
        let Some(len) = rest[start..].find('}') else { break };
        out.push(rest[start + 1..start + len].to_string());
        rest = &rest[start + len + 1..];
    }
    out
}

fn fill(pattern: &str, values: &BTreeMap<&str, String>) -> String {
    let mut out = pattern.to_string();
    for (slot, v) in values {
        out = out.replace(&format!("{{{slot}}}"), v);
    }
    out
}

/// Percentage with two decimals, e.g. "33.77%".
pub fn format_percent(ratio: f64) -> String {
    format!("{:.2}%", ratio * 100.0)
}

/// Compact number: integers without decimals, otherwise up to four
/// significant decimals.
pub fn format_value(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else if x.abs() >= 1.0 {
        format!("{x:.2}")
    } else {
        format!("{x:.4}")
    }
}

fn format_p(p: f64) -> String {
    if p < 1e-4 {
        "p < 0.0001".into()
    } else {
        format!("p = {p:.4}")
    }
}

/// "a", "a and b", "a, b and c".
pub fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Member with the highest degree, ties to the smallest id rank.
fn representative(g: &Graph, members: &[usize]) -> Option<usize> {
    members.iter().copied().max_by(|&a, &b| g.degree(a).cmp(&g.degree(b)).then(g.id_rank(b).cmp(&g.id_rank(a))))
}

/// Reader-facing name of a focus component.
pub fn component_name(g: &Graph, c: &Component, partition: &PartitionMethod) -> String {
    match c {
        Component::Node(v) => g.id(*v).to_string(),
        Component::Community { members, .. } => {
            if let PartitionMethod::Categorical(attr) = partition {
                if let Some(value) = members.first().and_then(|&v| g.node(v).categorical.get(attr)) {
                    return format!("the {attr} {value} group");
                }
            }
            match representative(g, members) {
                Some(v) => format!("the community containing {}", g.id(v)),
                None => "an empty community".into(),
            }
        }
    }
}

fn subgraph_phrase(filters: &[Filter]) -> String {
    if filters.is_empty() {
        return "the whole graph".into();
    }
    let parts: Vec<String> = filters
        .iter()
        .map(|f| match f.field.parse::<PartitionMethod>() {
            Ok(m) if m.is_community_level() && !matches!(m, PartitionMethod::Categorical(_)) => {
                format!("{} community {}", method_phrase(&m, true), f.value)
            }
            _ => format!("{} {}", f.field, f.value),
        })
        .collect();
    format!("the subgraph of {}", join_list(&parts))
}

fn method_phrase(m: &PartitionMethod, singular: bool) -> String {
    let s = match m {
        PartitionMethod::None => "node",
        PartitionMethod::ConnectedComponents => "connected component",
        PartitionMethod::GreedyModularity => "greedy modularity",
        PartitionMethod::Categorical(a) => return if singular { format!("{a} group") } else { format!("{a} groups") },
    };
    match (m, singular) {
        (_, true) => s.to_string(),
        (PartitionMethod::GreedyModularity, false) => "greedy modularity communities".into(),
        _ => format!("{s}s"),
    }
}

fn measure_noun(m: &Measure) -> String {
    match m {
        Measure::Count => "number of nodes".into(),
        other => other.display_name(),
    }
}

fn role(f: &GraphFact) -> Role {
    match f.measure.level() {
        Level::Node => Role::Node,
        Level::Community => Role::Community,
    }
}

/// One or two sentences describing the fact.
pub fn annotation_text(f: &GraphFact, g: &Graph, templates: &Templates) -> String {
    let names: Vec<String> = f.focus.iter().map(|c| component_name(g, c, &f.partition)).collect();
    let translated = translation(&f.measure, role(f), Polarity::Highest);
    let p_value = (1.0 - f.interestingness).clamp(0.0, 1.0);
    let (value, variant) = match f.fact_type {
        FactType::Extreme | FactType::Outlier => {
            (f.focus_values.first().map(|&v| format_value(v)).unwrap_or_default(), translated.is_none().then_some("plain"))
        }
        FactType::Rank => (join_list(&f.focus_values.iter().map(|&v| format_value(v)).collect::<Vec<_>>()), None),
        FactType::Proportion => {
            (format_percent(f.share().unwrap_or(0.0)), translated.is_none().then_some("plain"))
        }
        FactType::Distribution => (format_p(p_value), (p_value > 0.05).then_some("normal")),
        FactType::Evenness => (format_p(p_value), (p_value > 0.05).then_some("even")),
    };
    let mut slots = BTreeMap::new();
    slots.insert("Focus", join_list(&names));
    slots.insert("Measure", measure_noun(&f.measure));
    slots.insert("MeasureTranslation", translate_measure(&f.measure, role(f), Polarity::Highest));
    slots.insert("Partition", method_phrase(&f.partition, false));
    slots.insert("Value", value);
    slots.insert("Subgraph", subgraph_phrase(&f.subgraph));
    capitalize(&fill(templates.get(f.fact_type, variant), &slots))
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Sentence-initial article, lowered after a conjunction.
fn lower_lead(s: &str) -> String {
    for lead in ["The ", "By "] {
        if let Some(rest) = s.strip_prefix(lead) {
            return format!("{}{rest}", lead.to_lowercase());
        }
    }
    s.to_string()
}

pub fn conjunction(r: Logical) -> Option<&'static str> {
    match r {
        Logical::Similarity => Some("Similarly"),
        Logical::Elaboration => Some("To elaborate"),
        Logical::Contrast => Some("In contrast"),
        Logical::Generalization => Some("Overall"),
        Logical::None => None,
    }
}

/// Counts sentence followed by one sentence per fact in reading order.
/// `texts` overrides the generated sentence of a fact by id.
pub fn summary_text(n: &Narrative, g: &Graph, templates: &Templates, texts: &BTreeMap<String, String>) -> String {
    let mut sentences = vec![format!(
        "The network {}has {} nodes and {} edges.",
        if g.name.is_empty() { String::new() } else { format!("{} ", g.name) },
        g.node_count(),
        g.edge_count()
    )];
    for id in &n.order {
        let Some(f) = n.fact(id) else { continue };
        let text = texts.get(id).cloned().unwrap_or_else(|| annotation_text(f, g, templates));
        let joined = match n.relation_to(id).and_then(|r| conjunction(r.logical)) {
            Some(c) => format!("{c}, {}", lower_lead(&text)),
            None => text,
        };
        sentences.push(joined);
    }
    sentences.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::{enumerate_facts, DiscoveryConfig};
    use proptest::prelude::*;

    #[test]
    fn translations_from_the_table() {
        assert_eq!(translate_measure(&Measure::Degree, Role::Node, Polarity::Highest), "a super connector");
        assert_eq!(
            translate_measure(&Measure::Separability, Role::Community, Polarity::Highest),
            "an isolated community with scarce external connections"
        );
        assert_eq!(translate_measure(&Measure::Count, Role::Community, Polarity::Lowest), "count");
    }

    #[test]
    fn bad_templates_are_rejected() {
        assert!(Templates::parse("Extreme | {Nope}").is_err());
        assert!(Templates::parse("Extreme {Focus}").is_err());
        let mut all = DEFAULT_TEMPLATES.to_string();
        all.push_str("\nDistribution.x | {Focus} is odd\n");
        assert!(Templates::parse(&all).is_err());
        assert!(Templates::parse("Extreme | {Focus}").is_err(), "other types missing");
    }

    #[test]
    fn join_and_percent() {
        assert_eq!(join_list(&["a".into(), "b".into(), "c".into()]), "a, b and c");
        assert_eq!(format_percent(26.0 / 77.0), "33.77%");
    }

    fn star() -> Graph {
        Graph::from_edge_list(
            "star",
            &["hub", "b", "c", "d", "e", "f", "g"],
            &[("hub", "b"), ("hub", "c"), ("hub", "d"), ("hub", "e"), ("e", "f"), ("f", "g")],
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn every_slot_is_filled(seed in 0u64..1000) {
            let g = star();
            let facts = enumerate_facts(&g, &DiscoveryConfig { seed, max_facts: 10_000, ..Default::default() }).unwrap();
            let t = Templates::default();
            for f in &facts {
                let s = annotation_text(f, &g, &t);
                prop_assert!(!s.contains('{') && !s.contains('}'), "{}", s);
                if let Some(share) = f.share() {
                    let pct: f64 = s.split('%').next().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
                    prop_assert!((pct / 100.0 - share).abs() <= 0.005 + 1e-12);
                }
            }
        }
    }
}
