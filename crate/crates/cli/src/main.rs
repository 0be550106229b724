//! `modcirc <command> --config <path> [--out <dir>]`
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical or
//! output failures. `MODCIRC_THREADS` sets the worker thread count.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::Command;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{module}: {source}")]
    Numerical {
        module: &'static str,
        source: modcirc::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialisation error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "modcirc", version, about = "Modulated delay-line circulator workbench")]
struct Args {
    /// Command to run; must match the `command` key of the configuration.
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MODCIRC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("MODCIRC_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("MODCIRC_THREADS: {e}")))
}

fn main_inner(args: Args) -> Result<(), CliError> {
    threads()?;
    let raw = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = config::parse_config(&raw)?;
    if cfg.command != args.command {
        return Err(CliError::Config(format!(
            "command line asks for {:?} but the configuration says {:?}",
            args.command, cfg.command
        )));
    }
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    for e in run::run(&cfg, &raw, &out)? {
        println!("{}  {}", e.sha256, out.join(&e.file).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("modcirc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
