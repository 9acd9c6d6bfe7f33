use std::path::PathBuf;

use anyhow::{Context, Result};
use calliope_core::export::export;
use calliope_core::graph::parse_graph_with_warnings;
use calliope_core::pipeline::{generate, poster, CancelToken, GenerateRequest};
use calliope_core::render::render_svg;
use clap::Args;
use log::{info, warn};

use crate::config::{load_config, parse_partition, parse_topic};

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Graph document (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Topic name or `auto`.
    #[arg(long, default_value = "auto")]
    pub topic: String,
    /// greedy-modularity, connected-components, none or attr:NAME.
    #[arg(long, default_value = "greedy-modularity")]
    pub partition: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// SVG poster output.
    #[arg(long, default_value = "poster.svg")]
    pub out: PathBuf,
    /// Narrative, layout and annotation export.
    #[arg(long)]
    pub export_json: Option<PathBuf>,
    /// TOML pipeline configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run_generate(args: &GenerateArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let templates = cfg.load_templates()?;
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (g, warnings) = parse_graph_with_warnings(&text)?;
    for w in warnings {
        warn!("{w}");
    }
    let req = GenerateRequest {
        topic: parse_topic(Some(&args.topic))?,
        partition: parse_partition(Some(&args.partition))?,
        seed: args.seed,
    };
    let story = generate(&g, &req, &cfg, &templates, &CancelToken::default())?;
    info!("{} facts, R = {:.4}, pattern {}", story.narrative.facts.len(), story.narrative.rewards.R, story.layout.pattern.kind.name());
    let p = poster(&g, &story, &cfg, &templates);
    std::fs::write(&args.out, render_svg(&p)).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.export_json {
        let json = serde_json::to_string_pretty(&export(&g, &story.narrative, &story.layout, &p))? + "\n";
        std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
