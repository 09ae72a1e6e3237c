//! Command-line harness.
//!
//! Usage:
//!   `paramfree <subcommand> [--config FILE] [--seed N] [--trials N] [--out FILE] [key=value ...]`
//!
//! Subcommands: lowerbound, scaling, concentration, select, adaptive,
//! strongconvex. Settings come from the optional config file first; bare
//! key=value arguments and the dedicated flags override it. The CSV report
//! goes to --out when given, otherwise to stdout. Exit status is 0 on
//! success and nonzero with a single machine-readable `error: ...` line on
//! stderr otherwise.

use std::path::PathBuf;
use std::process::ExitCode;

use paramfree::harness::{run_experiment, ExperimentConfig, ExperimentKind};

const USAGE: &str = "usage: paramfree <lowerbound|scaling|concentration|select|adaptive|strongconvex> \
[--config FILE] [--seed N] [--trials N] [--out FILE] [key=value ...]";

fn main() -> ExitCode {
    match run(std::env::args().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: Vec<String>) -> Result<(), String> {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        println!("{USAGE}");
        return Ok(());
    }
    let kind = ExperimentKind::parse(&args[0]).map_err(|e| format!("kind=usage detail={e}"))?;

    let mut config_path: Option<PathBuf> = None;
    let mut out_path: Option<PathBuf> = None;
    let mut overrides: Vec<String> = Vec::new();
    let mut it = args[1..].iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => {
                let v = it.next().ok_or("kind=usage detail=--config needs a path")?;
                config_path = Some(PathBuf::from(v));
            }
            "--out" => {
                let v = it.next().ok_or("kind=usage detail=--out needs a path")?;
                out_path = Some(PathBuf::from(v));
            }
            "--seed" => {
                let v = it.next().ok_or("kind=usage detail=--seed needs a value")?;
                overrides.push(format!("seed={v}"));
            }
            "--trials" => {
                let v = it.next().ok_or("kind=usage detail=--trials needs a value")?;
                overrides.push(format!("trials={v}"));
            }
            other if other.contains('=') && !other.starts_with('-') => {
                overrides.push(other.to_string());
            }
            other => return Err(format!("kind=usage detail=unrecognized argument {other:?}")),
        }
    }

    let mut cfg = match config_path {
        Some(p) => ExperimentConfig::from_file(&p)
            .map_err(|e| format!("kind=config detail={e}"))?,
        None => ExperimentConfig::new(),
    };
    cfg.set("experiment", kind.label());
    for pair in &overrides {
        cfg.merge_pair(pair).map_err(|e| format!("kind=config detail={e}"))?;
    }
    if let Some(p) = &out_path {
        cfg.set("out", p.display());
    }

    let report = run_experiment(&cfg).map_err(|e| format!("kind=run detail={e}"))?;
    let csv = report.to_csv();
    match out_path {
        Some(p) => std::fs::write(&p, csv).map_err(|e| format!("kind=io detail={e}"))?,
        None => print!("{csv}"),
    }
    Ok(())
}
