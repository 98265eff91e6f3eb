//! Batch driver for quantized distributed estimation experiments.
//!
//! Three subcommands share one TOML configuration: `bound` evaluates the
//! lower bounds at every sweep point, `fisher` tabulates information
//! quantities, and `simulate` adds worst-case Monte Carlo risks and a
//! dominance check per row.

pub mod config;
pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, ExperimentConfig, OutputFormat};
use crate::sweep::Context;

/// Read when neither `--jobs` nor `simulation.jobs` is set.
pub const JOBS_ENV: &str = "QUANTBOUND_JOBS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DOMINANCE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "quantbound", version, about = "Minimax lower bounds for k-bit distributed estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower bounds at every sweep point.
    Bound(CommonArgs),
    /// Information quantities over the θ grid.
    Fisher(CommonArgs),
    /// Bounds, worst-case Monte Carlo risks and dominance checks.
    Simulate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `simulation.master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `output.path`; stdout when neither is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Result of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub rows: usize,
    pub dominance_failures: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.dominance_failures > 0 {
            EXIT_DOMINANCE
        } else {
            EXIT_OK
        }
    }
}

/// Flag, then config, then environment.
fn resolve_jobs(flag: Option<usize>, config: Option<usize>) -> Result<Option<usize>, ConfigError> {
    if flag == Some(0) {
        return Err(ConfigError("--jobs must be at least 1".into()));
    }
    if let Some(j) = flag.or(config) {
        return Ok(Some(j));
    }
    match std::env::var(JOBS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(j) if j > 0 => Ok(Some(j)),
            _ => Err(ConfigError(format!("{JOBS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let (args, kind) = match &cli.command {
        Command::Bound(a) => (a, "bound"),
        Command::Fisher(a) => (a, "fisher"),
        Command::Simulate(a) => (a, "simulate"),
    };
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.simulation.master_seed = seed;
    }
    let jobs = resolve_jobs(args.jobs, config.simulation.jobs)?;
    let format = args.format.unwrap_or(config.output.format);
    let out = args.out.clone().or_else(|| config.output.path.as_ref().map(PathBuf::from));

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build()?;
    pool.install(|| {
        let ctx = Context::new(config)?;
        match kind {
            "bound" => {
                let rows = sweep::bound_rows(&ctx)?;
                output::emit(&rows, &sweep::RESULT_COLUMNS, format, out.as_deref())?;
                Ok(Outcome { rows: rows.len(), dominance_failures: 0 })
            }
            "fisher" => {
                let rows = sweep::fisher_rows(&ctx)?;
                output::emit(&rows, &sweep::FISHER_COLUMNS, format, out.as_deref())?;
                Ok(Outcome { rows: rows.len(), dominance_failures: 0 })
            }
            _ => {
                let rows = sweep::simulate_rows(&ctx)?;
                output::emit(&rows, &sweep::RESULT_COLUMNS, format, out.as_deref())?;
                let failures = rows.iter().filter(|r| r.dominated == Some(false)).count();
                Ok(Outcome { rows: rows.len(), dominance_failures: failures })
            }
        }
    })
}

/// Parse `args`, run, report errors on stderr and return the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(outcome) => {
            if outcome.dominance_failures > 0 {
                eprintln!("{} of {} rows failed the dominance check", outcome.dominance_failures, outcome.rows);
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                EXIT_CONFIG
            } else {
                EXIT_FAILURE
            }
        }
    }
}
