//! `doa` — dataset synthesis, training, evaluation, verification and
//! benchmarking for sparse single-snapshot DoA estimation.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::*;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "doa",
    about = "Sparse DoA estimation: LASSO solvers and unfolded networks",
    version
)]
struct Cli {
    /// Worker threads for data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file (full config; see README for the schema).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in config: paper (M=30, N=256) or desk (M=16, N=64).
    #[arg(long)]
    preset: Option<Preset>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize train/val/test datasets.
    GenData {
        #[command(flatten)]
        common: CommonArgs,
        /// Use the sparse-array variant of the preset geometry.
        #[arg(long)]
        sla: bool,
    },
    /// Train one unfolded network.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Architecture: ista-family or admm-family kind.
        #[arg(long, value_parser = ["lista", "tlista", "thlista", "admmnet", "cadmmnet", "chadmmnet"])]
        kind: Option<String>,
    },
    /// Run estimators over per-SNR test sets and emit metric curves.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the built-in solver/network/gradient cross-checks.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Per-layer forward timings across grid sizes.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn resolve<C: for<'de> serde::Deserialize<'de>>(
    common: &CommonArgs,
    preset_fn: impl Fn(Preset) -> C,
) -> Result<C, doa_core::DoaError> {
    match (&common.config, common.preset) {
        (Some(path), _) => load_config(path),
        (None, Some(p)) => Ok(preset_fn(p)),
        (None, None) => Err(doa_core::DoaError::Config(
            "pass --config FILE or --preset paper|desk".into(),
        )),
    }
}

fn run() -> Result<bool, doa_core::DoaError> {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| doa_core::DoaError::Config(format!("worker pool: {e}")))?;
    }
    match &cli.command {
        Command::GenData { common, sla } => {
            let mut cfg = resolve(common, |p| GenDataConfig::preset(p, *sla))?;
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            if let Some(out) = &common.out {
                cfg.out_dir = out.clone();
            }
            commands::ensure_parent_exists(&resolve_out_dir(&cfg.out_dir))?;
            commands::cmd_gen_data(&cfg)?;
            Ok(true)
        }
        Command::Train { common, kind } => {
            let mut cfg = resolve(common, TrainCliConfig::preset)?;
            if let Some(seed) = common.seed {
                cfg.seed = seed;
            }
            if let Some(out) = &common.out {
                cfg.out_dir = out.clone();
            }
            if let Some(kind) = kind {
                cfg.kind = kind.clone();
            }
            commands::cmd_train(&cfg)?;
            Ok(true)
        }
        Command::Eval { common } => {
            let mut cfg = resolve(common, EvalCliConfig::preset)?;
            if let Some(out) = &common.out {
                cfg.out_dir = out.clone();
            }
            commands::cmd_eval(&cfg)?;
            Ok(true)
        }
        Command::Verify { seed } => commands::cmd_verify(*seed),
        Command::Bench { common } => {
            let mut cfg = resolve(common, BenchCliConfig::preset)?;
            if let Some(out) = &common.out {
                cfg.out_dir = out.clone();
            }
            commands::cmd_bench(&cfg)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        // A verify run that completed but found failures.
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
