//! Command-line driver tying the library into reproducible experiments.
//!
//! Every run is deterministic given the resolved configuration (file plus
//! flag overrides), including under `--threads N` for any N.  Exit codes:
//! 0 pass, 1 contract failure, 2 configuration or input error, 3 numerical
//! abort.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use gibbsdisc_core::error::Error;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "gibbsdisc", version, about = "Gibbs ensembles for the radial NLS on the unit disc")]
struct Cli {
    /// JSON run configuration; missing sections take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override measure.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override output_dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for ensemble stages; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Bessel zeros with their asymptote and residual.
    Zeros {
        /// Override zeros.n_max.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Draw a weighted ensemble; write it with summary statistics and tails.
    Sample,
    /// Integrate an ensemble, writing conservation data and one trajectory.
    Evolve {
        /// Ensemble file to integrate instead of drawing a fresh one.
        #[arg(long, value_name = "PATH")]
        ensemble: Option<PathBuf>,
    },
    /// Compare weighted observable means before and after the flow.
    Invariance,
    /// Tabulate bilinear products, resonance counts and lattice counts.
    Checks,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a str,
    violations: Vec<String>,
}

fn fail(kind: &str, violations: Vec<String>, code: u8) -> ExitCode {
    let doc = ErrorDoc { error: kind, violations };
    eprintln!("{}", serde_json::to_string(&doc).expect("error report serializes"));
    ExitCode::from(code)
}

/// Contract failures exit 1, bad configs or inputs 2, numerical blowups 3.
fn fail_core(e: Error) -> ExitCode {
    let (kind, code) = match &e {
        Error::Config(_) => ("config", 2),
        Error::GridMismatch { .. } | Error::Format(_) | Error::Io(_) | Error::Json(_) => {
            ("input", 2)
        }
        Error::NumericalAbort { .. } | Error::ZeroBracket { .. } => ("numerical_abort", 3),
        Error::ExclusionRate { .. } => ("contract", 1),
    };
    fail(kind, vec![e.to_string()], code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(k) = cli.threads {
        if k == 0 {
            return fail("config", vec!["--threads must be at least 1".into()], 2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            return fail("config", vec![format!("thread pool: {e}")], 2);
        }
    }

    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(cfg) => cfg,
            Err(violations) => return fail("config", violations, 2),
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.measure.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    let violations = cfg.violations();
    if !violations.is_empty() {
        return fail("config", violations, 2);
    }

    let result = match cli.command {
        Command::Zeros { n_max } => commands::cmd_zeros(&cfg, n_max),
        Command::Sample => commands::cmd_sample(&cfg),
        Command::Evolve { ensemble } => commands::cmd_evolve(&cfg, ensemble),
        Command::Invariance => commands::cmd_invariance(&cfg),
        Command::Checks => commands::cmd_checks(&cfg),
    };
    match result {
        Ok(code) => code,
        Err(e) => fail_core(e),
    }
}
