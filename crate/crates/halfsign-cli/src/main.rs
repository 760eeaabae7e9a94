//! `halfsign`: experiment driver for exact sign and non-vanishing
//! statistics of half-integral weight coefficient families.
//!
//! Every subcommand reads one plain-text `key=value` config (defaults
//! apply when none is given), runs deterministically for a fixed config
//! and seed, and writes its artifacts plus a hashed manifest.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::SignReportKind;

#[derive(Parser)]
#[command(
    name = "halfsign",
    version,
    about = "Sign statistics of half-integral weight coefficient families"
)]
struct Cli {
    /// Plain-text key=value configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Artifact directory (the HALFSIGN_OUT environment variable overrides
    /// this flag).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads; 0 keeps the library default.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Seed for randomized property tests.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact coefficient table: scaled values, lift eigenvalues, signs.
    Coeffs,
    /// Sign statistics over the x grid.
    Signs {
        /// Which report to produce.
        #[arg(long, value_enum, default_value_t = SignReportKind::Balance)]
        report: SignReportKind,
    },
    /// First negative census index and the positivity threshold.
    Nf,
    /// Longest run of consecutive vanishing coefficients.
    Gaps,
    /// Smooth-density table and the crossover constant.
    Dickman,
    /// Square-free friable census against the density prediction.
    Friable,
    /// Band-weighted sums against the density prediction.
    Lemma42,
    /// Log-weighted summatory envelope and the chain inequality.
    Summatory,
    /// Sieve a window free of a coprime set.
    Bfree,
    /// Run the acceptance suite; exit 1 on any hard failure.
    Accept {
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let cfg = config::load(
        cli.config.as_deref(),
        cli.out.as_deref(),
        cli.threads,
        cli.seed,
    )?;
    if cfg.threads > 0 {
        // Ignore the error when a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    match cli.cmd {
        Cmd::Coeffs => commands::coeffs(&cfg)?,
        Cmd::Signs { report } => commands::signs(&cfg, report)?,
        Cmd::Nf => commands::nf(&cfg)?,
        Cmd::Gaps => commands::gaps(&cfg)?,
        Cmd::Dickman => commands::dickman(&cfg)?,
        Cmd::Friable => commands::friable(&cfg)?,
        Cmd::Lemma42 => commands::lemma42(&cfg)?,
        Cmd::Summatory => commands::summatory(&cfg)?,
        Cmd::Bfree => commands::bfree(&cfg)?,
        Cmd::Accept { json } => return commands::accept(&cfg, json),
    }
    Ok(ExitCode::SUCCESS)
}
