//! Command-line front end.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::*;
pub use config::*;

#[derive(Debug, Parser)]
#[command(name = "wfde", version, about = "Weighted fast diffusion: solver, exact solutions and estimate checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the configuration and `WFDE_OUT_DIR`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Treat warnings (failed sweep points, non-positive constants) as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads for parallel runs and probes.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for randomized sample points.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the configured problem and write trajectories.
    Simulate,
    /// Solve and evaluate the configured checks; exit 4 on an unexpected outcome.
    Check {
        /// Restrict to these check names.
        names: Vec<String>,
    },
    /// Tabulate exponents and measured constants along one parameter axis.
    Sweep,
    /// Measure the constant ledger.
    Constants,
    /// Run the exact-solution oracle suite.
    VerifyExact,
}

/// Parses `args` and runs the subcommand; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let g = Globals { out: cli.out.clone(), strict: cli.strict, seed: cli.seed, jobs: cli.jobs };
    let cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => Some(c),
            Err(e) => {
                eprintln!("error: {e}");
                return if matches!(e, crate::Error::Io(_)) { EXIT_IO } else { EXIT_CONFIG };
            }
        },
        None => None,
    };
    let need = |cfg: Option<RunConfig>| -> std::result::Result<RunConfig, i32> {
        cfg.ok_or_else(|| {
            eprintln!("error: this subcommand needs --config");
            EXIT_CONFIG
        })
    };
    let run = |f: &dyn Fn(&RunConfig) -> i32| match need(cfg.clone()) {
        Ok(c) => f(&c),
        Err(code) => code,
    };
    match &cli.command {
        Command::Simulate => run(&|c| cmd_simulate(c, &g)),
        Command::Check { names } => run(&|c| cmd_check(c, names, &g)),
        Command::Sweep => run(&|c| cmd_sweep(c, &g)),
        Command::Constants => run(&|c| cmd_constants(c, &g)),
        Command::VerifyExact => cmd_verify_exact(cfg.as_ref(), &g),
    }
}
