use std::path::Path;

use anyhow::{Context, Result};
use calliope_core::graph::PartitionMethod;
use calliope_core::organize::Topic;
use calliope_core::pipeline::PipelineConfig;

/// Reads a TOML pipeline configuration; missing keys keep their defaults.
pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let Some(path) = path else { return Ok(PipelineConfig::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg: PipelineConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    // Template paths are relative to the config file.
    if let (Some(t), Some(dir)) = (&cfg.templates, path.parent()) {
        if t.is_relative() {
            cfg.templates = Some(dir.join(t));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `auto` (or nothing) lets the bandit pick the topic.
pub fn parse_topic(s: Option<&str>) -> calliope_core::Result<Option<Topic>> {
    match s {
        None => Ok(None),
        Some(s) if s.eq_ignore_ascii_case("auto") => Ok(None),
        Some(s) => s.parse().map(Some),
    }
}

pub fn parse_partition(s: Option<&str>) -> calliope_core::Result<PartitionMethod> {
    s.map(str::parse).unwrap_or(Ok(PartitionMethod::GreedyModularity))
}
