//! `combcool` command-line runner.
//!
//! Exit status: 0 on success, 2 for invalid input (flags, config, schema),
//! 3 when a run fails. Errors go to stderr prefixed `error[validation]:` or
//! `error[runtime]:`.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "combcool", version, about = "Two-photon comb cooling simulator and planner")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ensemble runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reject unknown config keys instead of warning.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scatter, ionization and Rabi-frequency budget table.
    Rates,
    /// Monte Carlo ensemble run; writes a CSV time series and a JSON summary.
    Mc,
    /// Deterministic rate-equation run for one-dimensional scenarios.
    Oracle,
    /// Intensity search for the cooling/ionization trade-off.
    Optimize,
    /// Comb offsets, EOM drive plan and feasibility for a level set.
    Schedule,
    /// Canned run for one acceptance check (name or number), or `all`.
    Reproduce { id: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Runtime(_) => "runtime",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::validation("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;
    }
    let overrides = config::Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
    };
    if let Command::Reproduce { id } = &cli.command {
        return run::reproduce(id, &overrides);
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::validation("--config is required for this command"))?;
    let loaded = config::load(path)?;
    if !loaded.unknown_keys.is_empty() {
        if cli.strict {
            return Err(CliError::validation(format!(
                "unknown config keys: {}",
                loaded
                    .unknown_keys
                    .iter()
                    .map(|k| format!("`{k}`"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        for k in &loaded.unknown_keys {
            eprintln!("warning[config]: ignoring unknown key `{k}`");
        }
    }
    let mut cfg = loaded.config;
    cfg.apply(&overrides);
    match cli.command {
        Command::Rates => run::rates(&cfg),
        Command::Mc => run::mc(&cfg),
        Command::Oracle => run::oracle(&cfg),
        Command::Optimize => run::optimize(&cfg),
        Command::Schedule => run::schedule(&cfg),
        Command::Reproduce { .. } => unreachable!(),
    }
}
