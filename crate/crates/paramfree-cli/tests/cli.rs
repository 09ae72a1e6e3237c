//! End-to-end tests of the `paramfree` binary: argument handling, config
//! file plus override precedence, CSV schemas, reproducibility, and the
//! failure exit path.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paramfree"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("paramfree_cli_{name}"))
}

#[test]
fn help_and_usage() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("usage: paramfree"));
    let out = run(&[]);
    assert!(out.status.success());
}

#[test]
fn unknown_subcommand_fails_with_machine_readable_line() {
    let out = run(&["frobnicate"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: "), "stderr was {err:?}");
    assert!(err.contains("kind=usage"));
}

#[test]
fn invalid_config_fails_nonzero() {
    // trials=0 violates the config invariant.
    let out = run(&["concentration", "trials_scalar=0"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: kind=run"), "stderr was {err:?}");

    // Strictly increasing n grids are enforced.
    let out = run(&["scaling", "n=400,200", "trials=2"]);
    assert!(!out.status.success());
}

#[test]
fn select_roundtrip_matches_worked_example() {
    let csv = tmp("losses.csv");
    let mut text = String::from("sample_id,model_0,model_1,model_2\n");
    for i in 0..10 {
        text.push_str(&format!("{i},0.43,0.37,0.33\n"));
    }
    std::fs::write(&csv, text).unwrap();
    let out = run(&[
        "select",
        &format!("csv={}", csv.display()),
        "tau=0,0.04,0.30",
        "gamma=3",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("k,mean,tau,in_safe_set,reliable_chosen,greedy_chosen"));
    assert!(stdout.contains("# summary.greedy_chosen=2"));
    assert!(stdout.contains("# summary.reliable_chosen=1"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = run(&["concentration", "--seed", "3", "trials_scalar=2000", "trials_vector=400"]);
    let b = run(&["concentration", "--seed", "3", "trials_scalar=2000", "trials_vector=400"]);
    assert!(a.status.success() && b.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);

    let a = run(&["lowerbound", "--trials", "30", "--seed", "11"]);
    let b = run(&["lowerbound", "--trials", "30", "--seed", "11"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_with_cli_overrides() {
    let cfg = tmp("scaling.cfg");
    std::fs::write(
        &cfg,
        "# scaling experiment config\nn=250,500\ntrials=10\nseed=2\nfamily.shift=1\n",
    )
    .unwrap();
    let out_path = tmp("scaling_out.csv");
    let out = run(&[
        "scaling",
        "--config",
        &cfg.display().to_string(),
        "--out",
        &out_path.display().to_string(),
        "trials=5",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    // The override won and the resolved config is echoed.
    assert!(text.contains("# trials=5\n"));
    assert!(text.contains("# seed=2\n"));
    assert!(text.contains("n,trial,subopt,radius,lambda,erm_flag"));
    // 2 grid points x 5 trials data rows.
    let data_rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("n,")).count();
    assert_eq!(data_rows, 10);
}
