//! The `membrane-tm` binary: exit codes, formats and reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn machine(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../machines").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_membrane-tm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stats_counts_sixteen_labels_for_p_2() {
    // The sweeper has p(n) = n + 1.
    let out = cli(&["stats", path(&machine("sweeper.tm")), "-n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "labels: 16"), "{text}");
    assert!(text.lines().any(|l| l == "labels (formula): 16"), "{text}");
    assert!(text.lines().any(|l| l == "cycle length: 9"), "{text}");
}

#[test]
fn simulate_immediate_accept() {
    let out = cli(&["simulate", path(&machine("accept.tm")), ""]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "accept"), "{text}");
    assert!(text.contains("seed: 24301"), "seed is echoed: {text}");
}

#[test]
fn verify_sweeper_reports_cycle_length() {
    let out = cli(&["verify", path(&machine("sweeper.tm")), "ab"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("cycle length: 9 (expected 9)"), "{text}");
    assert!(text.contains("boundaries matched: 4/4"), "{text}");
}

#[test]
fn run_tm_exit_codes_follow_the_verdict() {
    let accept = cli(&["run-tm", path(&machine("sweeper.tm")), "abba"]);
    assert_eq!(accept.status.code(), Some(0));
    assert!(stdout(&accept).starts_with("verdict: accept\nsteps: 5\n"));
    let reject = cli(&["verify-nd", path(&machine("contradiction.tm")), ""]);
    assert_eq!(reject.status.code(), Some(0), "verified, even though the verdict is reject");
    let sim = cli(&["simulate", path(&machine("contradiction.tm")), ""]);
    assert_eq!(sim.status.code(), Some(1));
    assert!(stdout(&sim).lines().any(|l| l == "reject"));
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tm");
    std::fs::write(&bad, "states: q\nalphabet: _ a\nstart: q\naccept: q\npoly: 1 0\ndelta: q a -> q a X\n").unwrap();
    let out = cli(&["run-tm", bad.to_str().unwrap(), "a"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("bad.tm:6:19:"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(cli(&["no-such-command"]).status.code(), Some(3));
    assert_eq!(cli(&["stats", "/nonexistent.tm", "-n", "1"]).status.code(), Some(3));
    let sweeper = machine("sweeper.tm");
    assert_eq!(cli(&["run-tm", path(&sweeper), "abc"]).status.code(), Some(3));
    assert_eq!(cli(&["--format", "csv-trace", "verify", path(&sweeper), "ab"]).status.code(), Some(3));
    // Deterministic verification of a forking machine is refused, not failed.
    assert_eq!(cli(&["verify", path(&machine("guess1.tm")), ""]).status.code(), Some(3));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn structured_outputs_are_byte_identical() {
    let sweeper = machine("sweeper.tm");
    let runs: [&[&str]; 5] = [
        &["--format", "structured", "verify", path(&sweeper), "bab"],
        &["--format", "structured", "simulate", path(&sweeper), "bab", "--seed", "7"],
        &["--format", "structured", "fuzz", path(&sweeper), "--cases", "6", "--seed", "3"],
        &["--format", "structured", "stats", path(&sweeper), "-n", "2"],
        &["compile", path(&sweeper), "-n", "2"],
    ];
    for args in runs {
        let a = cli(args);
        let b = cli(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", stderr(&a));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        serde_json::from_slice::<serde_json::Value>(&a.stdout).unwrap();
    }
}

#[test]
fn fuzz_echoes_seed_and_passes() {
    let out = cli(&["fuzz", path(&machine("sweeper.tm")), "--cases", "8", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.starts_with("seed: 11\n"));
    assert!(text.ends_with("passed: 8/8\n"));
    let nd = cli(&["fuzz", path(&machine("guess1.tm")), "--cases", "4", "--nd"]);
    assert_eq!(nd.status.code(), Some(0), "{}", stdout(&nd));
}

#[test]
fn trace_rows_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = cli(&[
        "simulate",
        path(&machine("sweeper.tm")),
        "ab",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&trace).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["step", "membrane_count", "object_count", "rules_applied", "emissions"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    // p = 3, m = 3: (p + 1) * 9 + 4 steps plus the initial row.
    assert_eq!(rows.len(), 41);
    let col = |r: &csv::StringRecord, i: usize| r[i].parse::<u64>().unwrap();
    for (t, r) in rows.iter().enumerate() {
        assert_eq!(col(r, 0), t as u64);
    }
    for w in rows[1..].windows(2) {
        assert!(col(&w[1], 1) <= col(&w[0], 1));
    }
    assert_eq!(&rows[40][4], "yes");
    assert!(rows[..40].iter().all(|r| r[4].is_empty()));

    let inline = cli(&["--format", "csv-trace", "simulate", path(&machine("sweeper.tm")), "ab"]);
    assert_eq!(inline.stdout, std::fs::read(&trace).unwrap());
}

#[test]
fn encode_spells_the_input_objects() {
    let out = cli(&["encode", path(&machine("sweeper.tm")), "abba"]);
    assert_eq!(stdout(&out), "a[1] a[4] b[2] b[3]\n");
}

#[test]
fn run_tm_csv_trace() {
    let out = cli(&["--format", "csv-trace", "run-tm", path(&machine("sweeper.tm")), "ab"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,state,head,tape"));
    assert_eq!(lines.next(), Some("0,q0,0,_ab_"));
    assert_eq!(lines.last(), Some("3,q1,3,_ba_"));
}
