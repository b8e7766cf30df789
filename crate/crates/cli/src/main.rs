//! `tofmap` — woody-vegetation mapping pipeline.
//!
//! Every subcommand exits 0 on success with a JSON summary on stdout, and
//! nonzero with a single machine-readable JSON error object on stderr:
//! `{"error":{"kind":...,"stage":...,"message":...}}`.

mod commands;
mod config;

use std::process::ExitCode;

use anyhow::anyhow;
use clap::Parser;

#[derive(Debug, Parser)]
#[command(
    name = "tofmap",
    version,
    about = "Map trees outside forests: reference masks, polygon classification, dataset splits, softmax merging, evaluation"
)]
struct Cli {
    /// Worker thread cap; overrides the TOFMAP_THREADS environment variable
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: commands::Command,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                err.exit();
            }
            emit_error("usage", None, err.render().to_string().trim_end());
            return ExitCode::from(2);
        }
    };
    match init_threads(cli.threads).and_then(|()| commands::dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, stage) = classify_error(&err);
            emit_error(&kind, stage.as_deref(), &format!("{err:#}"));
            ExitCode::FAILURE
        }
    }
}

/// Cap the global worker pool. Precedence: --threads flag, then the
/// TOFMAP_THREADS environment variable, then one worker per core.
fn init_threads(flag: Option<usize>) -> anyhow::Result<()> {
    let cap = match flag {
        Some(n) => Some(n),
        None => match std::env::var("TOFMAP_THREADS") {
            Ok(raw) => Some(raw.parse::<usize>().map_err(|_| {
                anyhow!("TOFMAP_THREADS must be a positive integer, got '{raw}'")
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = cap {
        if n == 0 {
            return Err(anyhow!("thread cap must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

/// Map an error chain to the stable (kind, stage) pair of the error JSON.
/// Library errors carry their own kind; bare I/O problems report "io";
/// everything else happened while assembling the run, hence "config".
fn classify_error(err: &anyhow::Error) -> (String, Option<String>) {
    for cause in err.chain() {
        if let Some(lib) = cause.downcast_ref::<tofmap_core::Error>() {
            return (lib.kind().to_string(), lib.stage().map(str::to_string));
        }
    }
    for cause in err.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return ("io".to_string(), None);
        }
    }
    ("config".to_string(), None)
}

fn emit_error(kind: &str, stage: Option<&str>, message: &str) {
    let body = serde_json::json!({
        "error": { "kind": kind, "stage": stage, "message": message }
    });
    eprintln!("{body}");
}
