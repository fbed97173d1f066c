//! `cf-statlab`: reproducible continued-fraction and orbit experiments.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 empty ensemble, 4 overflow,
//! 1 anything else (I/O).

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{Command, Ctx};
use output::Cache;

#[derive(Debug, Parser)]
#[command(name = "cf-statlab", version, about)]
struct Cli {
    /// Worker threads (default: all cores). Never changes any output byte.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for output files.
    #[arg(long, short = 'o', global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Result cache directory (overrides CF_STATLAB_CACHE).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Ignore the cache for this run.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use cf_statlab::Error;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::EmptyEnsemble(_) => 3,
                Error::Overflow(_) => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("global pool is configured once");
    }
    let ctx = Ctx {
        cache: Cache::resolve(cli.cache_dir.as_deref(), cli.no_cache),
        out_dir: cli.out_dir,
    };
    match cli.command.run(&ctx) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
