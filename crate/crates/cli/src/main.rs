//! `affine-dim`: Lyapunov spectra, domination and dimension of self-affine measures.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{DimFlags, RunContext};
use config::RunConfig;

/// Exit code for a failed validation case.
const EXIT_VALIDATION: u8 = 1;
/// Exit code for bad usage, unreadable input, or a refused request.
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "affine-dim", version, about)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the report (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit wall-clock fields so repeated runs give identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the number of Lyapunov trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the Lyapunov spectrum.
    Lyapunov {
        /// Also write per-trial partial sums as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Scan singular-value gap ratios and test positivity.
    Domination,
    /// Run the full dimension pipeline.
    Dim {
        /// Fiber entropy `H`, tagged as user supplied.
        #[arg(long = "H", value_name = "H")]
        fiber_entropy: Option<f64>,
        /// Take `H = 0`; refused unless strong separation is verified.
        #[arg(long, conflicts_with = "fiber_entropy")]
        assume_ssc: bool,
        /// Write the per-center local-dimension slopes as CSV.
        #[arg(long, value_name = "PATH")]
        emit_histogram: Option<PathBuf>,
    },
    /// Compare the pipeline against closed-form cases.
    Validate,
    /// Sample the measure and write the points as CSV.
    Sample,
}

enum Failure {
    Usage(anyhow::Error),
    Validation,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("AFFINE_DIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("AFFINE_DIM_THREADS={raw:?} is not a count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot size the thread pool")?;
    Ok(())
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.lyapunov.trials = trials;
    }
    cfg.dim.seed = cfg.seed;
    cfg.dim.lyapunov = cfg.lyapunov.clone();
    if let Command::Dim { fiber_entropy: Some(h), .. } = cli.command {
        cfg.dim.fiber_entropy = Some(h);
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(bytes).and_then(|()| stdout.flush()) {
                // A closed pipe (e.g. `| head`) is not an error of ours.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let started = (!cli.deterministic).then(Instant::now);
    let config = resolve_config(&cli)?;
    let mut cx = RunContext { config: &config, started, warnings: Vec::new() };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Lyapunov { csv } => {
            let bytes = commands::lyapunov(&mut cx, csv.as_deref())?;
            emit(out, &bytes)?;
        }
        Command::Domination => {
            let bytes = commands::domination(&mut cx)?;
            emit(out, &bytes)?;
        }
        Command::Dim { assume_ssc, emit_histogram, .. } => {
            let flags = DimFlags { assume_ssc: *assume_ssc, histogram: emit_histogram.as_deref() };
            let bytes = commands::dim(&mut cx, &flags)?;
            emit(out, &bytes)?;
        }
        Command::Sample => {
            let bytes = commands::sample(&mut cx)?;
            emit(out, &bytes)?;
        }
        Command::Validate => {
            let (bytes, table, passed) = commands::validate(&mut cx)?;
            print!("{table}");
            if let Some(path) = out {
                emit(Some(path), &bytes)?;
            }
            if !passed {
                eprintln!("validation failed");
                return Err(Failure::Validation);
            }
        }
    }
    Ok(())
}
