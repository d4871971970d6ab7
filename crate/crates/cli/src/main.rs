//! `entanglab <subcommand> --config <path> [--out-dir <path>] [--threads N] [--seed S]`

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Provenance, Sink};

#[derive(Parser, Debug)]
#[command(name = "entanglab", version, about = "Buffer-conditioned entanglement experiments on finite spin lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; 0 or unset uses all cores.
    #[arg(long, env = "ENTANGLAB_THREADS")]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the Ising ground state and persist it as a QPSV file.
    Ground(Common),
    /// Entanglement entropy over a family of blocks.
    EntropyScan(Common),
    /// Decoupling table over buffer widths.
    BufferScan(Common),
    /// Mutual information against shifted copies of a region.
    MutualInfo(Common),
    /// The inequality audit suite.
    Audit(Common),
    /// Brute-force cross-checks on small windows.
    Oracle(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Ground(c) => ("ground", c),
            Command::EntropyScan(c) => ("entropy-scan", c),
            Command::BufferScan(c) => ("buffer-scan", c),
            Command::MutualInfo(c) => ("mutual-info", c),
            Command::Audit(c) => ("audit", c),
            Command::Oracle(c) => ("oracle", c),
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let (name, common) = cli.command.parts();
    let bytes = std::fs::read(&common.config)
        .map_err(|source| CliError::Io { context: format!("reading {}", common.config.display()), source })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("config is not UTF-8: {e}")))?;
    let config = ExperimentConfig::parse(text)?;
    if let Some(n) = common.threads.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let seed = common.seed.or(config.seed).unwrap_or(0);
    let stem = config.output.stem.clone().unwrap_or_else(|| name.to_string());
    let base = common.config.parent().map(PathBuf::from).unwrap_or_default();
    let ctx = Context {
        config,
        base,
        seed,
        sink: Sink { dir: common.out_dir.clone(), stem, provenance: Provenance::new(&bytes, seed) },
    };
    match &cli.command {
        Command::Ground(_) => commands::ground(&ctx),
        Command::EntropyScan(_) => commands::entropy_scan(&ctx),
        Command::BufferScan(_) => commands::buffer_scan(&ctx),
        Command::MutualInfo(_) => commands::mutual_info(&ctx),
        Command::Audit(_) => commands::audit(&ctx),
        Command::Oracle(_) => commands::oracle(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("entanglab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
