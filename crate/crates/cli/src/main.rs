//! `zsa`: command-line front end for zero search, level curves, profiles,
//! bounds, structural checks and reports.
//!
//! Exit codes: 0 success, 1 a check failed (or an internal error), 2 zero
//! enumeration incomplete, 64 usage error.

// `!(a < b)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use zsa_core::strips::TheoremId;
use zsa_core::{Family, Rectangle};

use crate::commands::Orders;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "zsa", version, about = "Zeros, level curves and real-part projection sets of partial sums of the zeta function")]
struct Cli {
    /// `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Zero cache directory (overrides ZSA_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Ignore any configured cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Zero-finding tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate the zeros of one polynomial in a rectangle.
    Zeros(ZerosArgs),
    /// Trace the level curve |G*_n(z)| = p^x0 and classify its components.
    Levels(LevelsArgs),
    /// Minimum and maximum modulus of G*_n along vertical lines.
    Profile(ProfileArgs),
    /// Empirical zero bounds and projection intervals.
    Bounds(BoundsArgs),
    /// Run structural checks and print a verdict table.
    Verify(VerifyArgs),
    /// Write one JSON report per order and an aggregate CSV.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    #[arg(long)]
    n: u64,
    /// zeta, G or Gstar.
    #[arg(long)]
    family: Family,
    /// `x_min,x_max,y_min,y_max`.
    #[arg(long, allow_hyphen_values = true)]
    rect: Rectangle,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LevelsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, allow_hyphen_values = true)]
    x0: f64,
    /// `x_min,x_max,y_min,y_max`; chosen from the extremes when omitted.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Rectangle>,
    /// Cell size of the tracing grid.
    #[arg(long)]
    grid: Option<f64>,
    /// Keep the horizontal window edges where given.
    #[arg(long)]
    no_snap: bool,
    /// Skip winding and zero counts inside closed loops.
    #[arg(long)]
    no_loop_check: bool,
    /// JSON output (default: levels-n<N>-x0<X0>.json in the output directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    n: u64,
    /// Comma-separated abscissae.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    /// Height of the sampled window.
    #[arg(long)]
    y_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Orders: `3`, `3,5`, `3..8`.
    #[arg(long, default_value = "3..8")]
    n: Orders,
    #[arg(long, default_value = "G")]
    family: Family,
    /// Height up to which zeros are collected.
    #[arg(long)]
    height: Option<f64>,
    /// CSV output (default: standard output only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated ids, e.g. `T15,C16` or `factorials`.
    #[arg(long, value_delimiter = ',', required = true)]
    theorems: Vec<TheoremId>,
    #[arg(long)]
    n: Option<Orders>,
    /// Height budget for zero witnesses.
    #[arg(long)]
    height: Option<f64>,
    #[arg(long)]
    k_max: Option<u64>,
    #[arg(long)]
    m_max: Option<u64>,
    #[arg(long)]
    grid_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, default_value = "3..12")]
    n: Orders,
    /// zeta or G.
    #[arg(long, default_value = "zeta")]
    family: Family,
    /// Height for empirical bounds.
    #[arg(long)]
    height: Option<f64>,
}

/// Outcome of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
    Incomplete,
}

/// Bad input detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

const EXIT_FAIL: u8 = 1;
const EXIT_INCOMPLETE: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(z) = cause.downcast_ref::<zsa_core::Error>() {
            return match z {
                zsa_core::Error::Domain(_) | zsa_core::Error::Precondition(_) => EXIT_USAGE,
                zsa_core::Error::IncompleteEnumeration { .. }
                | zsa_core::Error::Boundary { .. }
                | zsa_core::Error::SearchExhausted(_) => EXIT_INCOMPLETE,
                _ => EXIT_FAIL,
            };
        }
    }
    EXIT_FAIL
}

fn configure(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.merge_file(path).map_err(|e| usage(format!("{e:#}")))?;
    }
    cfg.merge_env();
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(d) = &cli.cache_dir {
        cfg.cache_dir = Some(d.clone());
    }
    if cli.no_cache {
        cfg.cache_dir = None;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    cfg.validate().map_err(|e| usage(format!("{e:#}")))?;
    Ok(cfg)
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    #[cfg(not(feature = "parallel"))]
    if threads.is_some_and(|t| t > 1) {
        eprintln!("warning: built without the parallel feature; running on one thread");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Status> {
    let mut cfg = configure(&cli)?;
    init_threads(cfg.threads)?;
    match cli.command {
        Command::Zeros(a) => commands::zeros(&cfg, a),
        Command::Levels(a) => commands::levels(&cfg, a),
        Command::Profile(a) => commands::profile(&cfg, a),
        Command::Bounds(a) => commands::bounds(&cfg, a),
        Command::Verify(a) => {
            if let Some(h) = a.height {
                cfg.height = h;
            }
            if let Some(k) = a.k_max {
                cfg.k_max = k;
            }
            if let Some(m) = a.m_max {
                cfg.m_max = m;
            }
            if let Some(g) = a.grid_step {
                cfg.grid_step = g;
            }
            cfg.validate().map_err(|e| usage(format!("{e:#}")))?;
            commands::verify(&cfg, a)
        }
        Command::Report(a) => {
            if let Some(h) = a.height {
                cfg.bounds_height = h;
            }
            cfg.validate().map_err(|e| usage(format!("{e:#}")))?;
            commands::report(&cfg, a)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(EXIT_FAIL),
        Ok(Status::Incomplete) => ExitCode::from(EXIT_INCOMPLETE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
