mod bench;
mod design;
mod evaluate;
mod ingest;
mod mine;
mod synth;

use std::path::{Path, PathBuf};

use crate::cli::{Cli, Command};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::Report;

/// Resolves the configuration and runs the selected command on a worker pool
/// of the configured size.
pub fn run(cli: &Cli) -> Result<Report> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_overrides(cli.overrides().map_err(CliError::Usage)?)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let mut report = pool.install(|| match &cli.command {
        Command::Ingest(_) => ingest::run(&cfg),
        Command::Design(_) => design::run(&cfg),
        Command::Evaluate(_) => evaluate::run(&cfg),
        Command::Bench(_) => bench::run(&cfg),
        Command::Synth(_) => synth::run(&cfg),
        Command::Mine(_) => mine::run(&cfg),
    })?;
    if cli.json {
        let path = report.write_json(&cfg.out)?;
        report.file(path);
    }
    Ok(report)
}

fn out_file(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
