//! Command-line front end: runs the verification suites and counting
//! oracles, emitting one JSON record per check.
//!
//! Records go to standard out (or `--output`) as JSON lines; a short
//! human summary goes to standard error. Exit status: 0 when every check
//! passed, 1 when violations were found, 2 for configuration or parse
//! errors, 3 when a computation exceeds its budget. Output depends only
//! on the resolved configuration (including the seed), never on thread
//! scheduling; `BOHRDIFF_THREADS` caps the worker pool.

mod commands;
mod config;

use bohrdiff_core::{Error, Result};
use clap::Parser;
use config::{Args, Resolved};
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bohrdiff",
    version,
    about = "Checks and counts for bias partitions, Hamming-ball coset coverage, \
             and the difference-avoiding construction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Run the seven-part shift lemma suite on a partition spec.
    VerifyLemmas(Args),
    /// Build construction parameters and report per-level densities.
    Build(Args),
    /// Check the construction's disjointness statements.
    CheckConstruction(Args),
    /// Check coset coverage by a union of translated Hamming balls.
    BohrDensity(Args),
    /// Exact cell and group counts for a partition spec.
    Count(Args),
    /// Brute-force the difference-set density threshold on a small group.
    BruteThreshold(Args),
}

impl Command {
    fn split(&self) -> (&'static str, &Args) {
        match self {
            Command::VerifyLemmas(a) => ("verify-lemmas", a),
            Command::Build(a) => ("build", a),
            Command::CheckConstruction(a) => ("check-construction", a),
            Command::BohrDensity(a) => ("bohr-density", a),
            Command::Count(a) => ("count", a),
            Command::BruteThreshold(a) => ("brute-threshold", a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<u64> {
    configure_threads()?;
    let (name, args) = cli.command.split();
    let cfg = Resolved::from_args(name, args)?;
    let records = commands::dispatch(&cfg)?;

    let mut out: Box<dyn Write> = match cfg.output.as_deref() {
        None | Some("-") => Box::new(std::io::stdout().lock()),
        Some(path) => Box::new(
            std::fs::File::create(path)
                .map_err(|e| Error::Parse(format!("cannot create {path}: {e}")))?,
        ),
    };
    let mut violations = 0;
    for rec in &records {
        writeln!(out, "{}", rec.to_json_line())
            .map_err(|e| Error::Parse(format!("write failed: {e}")))?;
        eprintln!(
            "{}: mode={} trials={} violations={}",
            rec.lemma_tag, rec.mode, rec.trials, rec.violations
        );
        violations += rec.violations;
    }
    out.flush().map_err(|e| Error::Parse(format!("write failed: {e}")))?;
    if violations == 0 {
        eprintln!("{name}: ok ({} records)", records.len());
    } else {
        eprintln!("{name}: {violations} violations");
    }
    Ok(violations)
}

fn configure_threads() -> Result<()> {
    match std::env::var("BOHRDIFF_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                Error::Parse(format!("BOHRDIFF_THREADS must be an integer (got {v:?})"))
            })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Parse(format!("thread pool: {e}")))
        }
    }
}
