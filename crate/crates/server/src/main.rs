use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fluidtag_core::{Store, StoreOptions};
use fluidtag_server::{bind, open_store, serve, ServerConfig};

#[derive(Parser)]
#[command(name = "fluidtagd", version, about = "Tag store HTTP service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "FLUIDTAG_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long, env = "FLUIDTAG_STORE")]
        store: PathBuf,
        /// File of `<username> <token>` lines.
        #[arg(long, env = "FLUIDTAG_CREDENTIALS")]
        credentials: Option<PathBuf>,
        /// Skip fsync after each write (faster, loses durability on power loss).
        #[arg(long, env = "FLUIDTAG_NO_FSYNC")]
        no_fsync: bool,
    },
    /// Rebuild indexes, compact the log and print an audit report.
    Reindex {
        #[arg(long, env = "FLUIDTAG_STORE")]
        store: PathBuf,
    },
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    log::info!("shutting down");
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Serve { bind: addr, store, credentials, no_fsync } => {
            let config = ServerConfig { bind: addr, store, credentials, sync: !no_fsync };
            let store = open_store(&config)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = bind(&config.bind).await?;
                println!("listening on {}", listener.local_addr()?);
                std::io::stdout().flush()?;
                serve(listener, store, shutdown_signal()).await
            })?;
        }
        Command::Reindex { store } => {
            let store = Store::open(&store, StoreOptions::default())?;
            let report = store.reindex()?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.is_clean() {
                return Err("audit found problems".into());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fluidtagd: {e}");
            ExitCode::FAILURE
        }
    }
}
