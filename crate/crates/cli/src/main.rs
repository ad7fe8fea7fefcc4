mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use config::{Command, Globals};

/// Peeling experiments on the uniform infinite planar triangulation.
///
/// Every run writes its resolved configuration to `<out-dir>/config.toml`;
/// `uipt --config <that file>` repeats it exactly.
#[derive(Debug, Parser)]
#[command(name = "uipt", version)]
struct Cli {
    /// Flat TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Output directory (default: $UIPT_OUT_DIR, then ./uipt-out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] uipt::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Failure {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Failure::Io { path: path.display().to_string(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Core(uipt::Error::InvalidArgument { .. }) => 2,
            Failure::Core(uipt::Error::StepBudgetExceeded { .. }) => 3,
            Failure::Io { .. } | Failure::Core(uipt::Error::Io { .. }) => 4,
            Failure::Core(_) => 1,
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let globals = Globals { seed: cli.seed, replicas: cli.replicas, out_dir: cli.out_dir, threads: cli.threads };
    let env_out_dir = std::env::var_os("UIPT_OUT_DIR").map(PathBuf::from);
    let cfg = config::resolve(cli.config.as_deref(), globals, cli.command, env_out_dir)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    cfg.save()?;
    commands::execute(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uipt: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
