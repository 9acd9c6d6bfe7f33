use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{Context, Result};
use calliope_cli::api::AppState;
use calliope_cli::config::load_config;
use calliope_cli::run::{run_generate, GenerateArgs};
use calliope_cli::{router, Store};
use clap::{Parser, Subcommand};
use log::info;

#[derive(Parser)]
#[command(name = "calliope", version, about = "Annotated node-link posters from automatically discovered graph facts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a poster from a graph file.
    Generate(GenerateArgs),
    /// Run the HTTP authoring service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Session directory; defaults to $CALLIOPE_DATA_DIR or ./calliope-data.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Generate(args) => run_generate(&args),
        Command::Serve { addr, data_dir, config } => {
            let cfg = load_config(config.as_deref())?;
            let templates = cfg.load_templates()?;
            let dir = data_dir
                .or_else(|| std::env::var_os("CALLIOPE_DATA_DIR").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("calliope-data"));
            let store = Store::new(&dir).with_context(|| format!("opening {}", dir.display()))?;
            let app = router(AppState { store, cfg, templates });
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                info!("listening on {addr}, sessions in {}", dir.display());
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                Ok(())
            })
        }
    }
}
