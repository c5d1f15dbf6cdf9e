//! The `dsy` command line: argument handling, run configs, artifact
//! emitters and the validation suites.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use crate::commands::{execute, ValidationFailed};
use crate::config::{Cli, OutputTarget, RunConfig};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_BOUND: i32 = 3;

/// Parses `args` (program name first), runs the task and returns the exit code.
/// Errors go to stderr as one JSON object.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "usage", "exit_code": EXIT_USAGE, "message": e.to_string().trim_end() }));
            return EXIT_USAGE;
        }
    };
    match run_cli(cli) {
        Ok(()) => 0,
        Err(e) => {
            let (kind, code) = classify(&e);
            let mut diag = json!({ "error": kind, "exit_code": code, "message": format!("{e:#}") });
            if let Some(dsy_core::Error::BoundViolated { witness, detail }) = core_error(&e) {
                diag["witness"] = json!(witness);
                diag["detail"] = json!(detail);
            }
            if let Some(v) = e.downcast_ref::<ValidationFailed>() {
                diag["failed"] = json!(v.failed);
            }
            eprintln!("{diag}");
            code
        }
    }
}

fn core_error(e: &anyhow::Error) -> Option<&dsy_core::Error> {
    e.chain().find_map(|c| c.downcast_ref::<dsy_core::Error>())
}

/// Error kind and exit code.
pub fn classify(e: &anyhow::Error) -> (&'static str, i32) {
    if e.downcast_ref::<ValidationFailed>().is_some() {
        return ("validation_failed", EXIT_BOUND);
    }
    match core_error(e) {
        Some(dsy_core::Error::BoundViolated { .. }) => ("bound_violated", EXIT_BOUND),
        Some(c) if c.is_numerical() => ("numerical", EXIT_NUMERICAL),
        Some(dsy_core::Error::GuardHitTree | dsy_core::Error::OrthogonalityViolated(_)) => ("numerical", EXIT_NUMERICAL),
        Some(_) => ("input", EXIT_USAGE),
        None => ("usage", EXIT_USAGE),
    }
}

fn run_cli(cli: Cli) -> Result<()> {
    let cfg = match (&cli.config, &cli.command) {
        (Some(_), Some(_)) => bail!("--config replaces the subcommand; give one or the other"),
        (None, None) => bail!("a subcommand or --config is required (see --help)"),
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            cfg
        }
        (None, Some(cmd)) => RunConfig { seed: cli.seed.unwrap_or(0), task: cmd.resolve()? },
    };
    let out = OutputTarget::new(&cli.out, &cfg.task);
    let echo = out.path(".config", "json");
    output::write_json(&echo, &cfg)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let outcome = pool.install(|| execute(&cfg, &out))?;
    for line in &outcome.summary {
        println!("{line}");
    }
    println!("wrote {}", echo.display());
    for p in &outcome.written {
        println!("wrote {}", p.display());
    }
    match outcome.failure {
        Some(f) => Err(f.into()),
        None => Ok(()),
    }
}
