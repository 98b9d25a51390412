use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use clustersim_cli::commands::{self, Loaded};
use clustersim_core::montecarlo::{Execution, SweepAxis};

/// Monte Carlo simulator for clustered LEO satellite downlinks.
#[derive(Debug, Parser)]
#[command(name = "clustersim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// JSON config, or a manifest from an earlier run.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed (and CLUSTERSIM_SEED).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores. Output does not depend on it.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coverage and ergodic capacity for one configuration.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
    /// One experiment per axis value.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        /// n_satellites, beta, scheme or formation.
        #[arg(long, value_name = "NAME")]
        axis: Option<String>,
        /// Comma list or start:stop:step.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// Fronthaul split feasibility for the configured cluster.
    Advise {
        #[command(flatten)]
        common: Common,
        /// Machine-readable report.
        #[arg(long)]
        json: bool,
    },
    /// Quick built-in consistency checks.
    Selftest,
}

fn load(common: &Common) -> Result<Loaded> {
    let mut loaded = commands::load(common.config.as_deref())?;
    let env_seed = match std::env::var("CLUSTERSIM_SEED") {
        Ok(s) => Some(s.trim().parse::<u64>().with_context(|| format!("CLUSTERSIM_SEED=`{s}` is not a u64"))?),
        Err(_) => None,
    };
    if let Some(seed) = common.seed.or(env_seed) {
        loaded.config.seed = seed;
    }
    Ok(loaded)
}

fn execution(common: &Common) -> Result<Execution> {
    match common.workers {
        Some(0) => bail!("--workers must be at least 1"),
        w => Ok(Execution::Parallel { workers: w }),
    }
}

fn report_written(w: &commands::Written) {
    eprintln!("wrote {} rows to {} and {}", w.rows.len(), w.csv.display(), w.manifest.display());
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { common, out } => {
            let loaded = load(&common)?;
            report_written(&commands::run(&loaded.config, &out, execution(&common)?)?);
        }
        Command::Sweep { common, out, axis, values } => {
            let loaded = load(&common)?;
            let (axis, values) = match (axis, values, loaded.sweep) {
                (Some(a), Some(v), _) => (a, v),
                (None, None, Some((a, v))) => (a, v.join(",")),
                (Some(a), None, Some((ma, v))) if a == ma => (a, v.join(",")),
                _ => bail!("sweep needs --axis and --values (or a sweep manifest as --config)"),
            };
            let axis: SweepAxis = axis.parse()?;
            let values = commands::parse_values(axis, &values)?;
            report_written(&commands::sweep(&loaded.config, axis, &values, &out, execution(&common)?)?);
        }
        Command::Advise { common, json } => {
            let loaded = load(&common)?;
            let report = commands::advise(&loaded.config)?;
            if json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            } else {
                emit(&report.to_string())?;
            }
        }
        Command::Selftest => {
            let outcomes = commands::selftest();
            let text: String = outcomes
                .iter()
                .map(|c| format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
                .collect();
            emit(&text)?;
            return Ok(outcomes.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

/// Writes to stdout; a closed reader is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
