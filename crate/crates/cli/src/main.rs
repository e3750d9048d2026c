//! `groupband`: simulate, analyze, schedule, lowerbound and selftest.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal assertion
//! (including a failed selftest).

mod analyze;
mod lowerbound;
mod output;
mod schedule;
mod selftest;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::{classify, UsageError};

#[derive(Parser, Debug)]
#[command(name = "groupband", version, about = "Grouped multi-armed bandit lab")]
pub struct Cli {
    /// Output directory (falls back to $GROUPBAND_OUT, then the config, then ./groupband-out).
    #[arg(long, global = true, env = "GROUPBAND_OUT")]
    pub out: Option<PathBuf>,

    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Leave timestamps out of every output so reruns are byte-identical.
    #[arg(long, global = true)]
    pub reproducible: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a Monte Carlo experiment described by a config file.
    Simulate(simulate::Args),
    /// Report sharing quantities of a structure and functionals of an instance.
    Analyze(analyze::Args),
    /// Emit the burn-in schedule of a structure.
    Schedule(schedule::Args),
    /// Generate lower-bound instances.
    Lowerbound(lowerbound::Args),
    /// Run the built-in oracle cross-checks.
    Selftest(selftest::Args),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", output::render(&e));
            ExitCode::from(classify(&e))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .map_err(|e| UsageError(format!("cannot start {} worker threads: {e}", cli.jobs)))?;
    let ctx = output::Context::new(&cli);
    match cli.command {
        Command::Simulate(args) => simulate::run(&ctx, args),
        Command::Analyze(args) => analyze::run(&ctx, args),
        Command::Schedule(args) => schedule::run(&ctx, args),
        Command::Lowerbound(args) => lowerbound::run(&ctx, args),
        Command::Selftest(args) => selftest::run(&ctx, args),
    }
}
