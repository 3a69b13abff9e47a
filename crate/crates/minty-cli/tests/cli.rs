//! End-to-end tests of the `minty` binary: flag handling, file outputs,
//! exit codes, and sweep determinism.

use std::path::Path;
use std::process::{Command, Output};

fn minty(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minty"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn solve_writes_trace_and_reports_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = minty(
        &[
            "solve",
            "--problem",
            "quasimonotone-vi",
            "--theta",
            "0.95",
            "--x0",
            "1,1",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("status=SolvedByYEqualsX"));
    assert!(text.contains("iterations=1"));

    // A one-iteration run yields a header plus one row.
    let trace = std::fs::read_to_string(dir.path().join("run/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    assert!(trace.starts_with("k,E,dist_to_anchor,m_k,theta_k,linesearch_lhs,num_cuts,wall_ms"));
}

#[test]
fn sweep_reproduces_reference_counts_and_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--problem",
        "quasimonotone-vi",
        "--algorithm",
        "alg2",
        "--theta",
        "0.95",
        "--x0", "0,0", "--x0", "0,1", "--x0", "1,0", "--x0", "1,1", "--x0", "0.3,0.5", "--x0", "0.7,0.1",
        "--out",
        "grid",
        "--traces",
    ];
    let out = minty(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary = std::fs::read_to_string(dir.path().join("grid/summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    let iterations: Vec<usize> = rows
        .iter()
        .map(|r| r.split(',').nth(8).unwrap().parse().unwrap())
        .collect();
    assert_eq!(iterations, vec![6, 5, 5, 1, 5, 5]);

    // Summary/trace consistency: the iteration column equals the number of
    // data rows in the matching trace file.
    for (i, &iters) in iterations.iter().enumerate() {
        let trace = std::fs::read_to_string(dir.path().join(format!("grid/traces/run_{i:04}.csv")))
            .unwrap();
        assert_eq!(trace.lines().count() - 1, iters);
    }

    // Determinism: a second execution produces the identical iteration column.
    let out2 = minty(&args, dir.path());
    assert!(out2.status.success());
    let summary2 = std::fs::read_to_string(dir.path().join("grid/summary.csv")).unwrap();
    let col = |s: &str| -> Vec<String> {
        s.lines().skip(1).map(|r| r.split(',').nth(8).unwrap().to_string()).collect()
    };
    assert_eq!(col(&summary), col(&summary2));
}

#[test]
fn verify_round_trips_a_saved_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = minty(
        &[
            "solve", "--problem", "quasimonotone-vi", "--theta", "0.95", "--x0", "0.3,0.5",
            "--out", "run",
        ],
        dir.path(),
    );
    assert!(out.status.success());

    let verify = minty(
        &[
            "verify", "--problem", "quasimonotone-vi", "--theta", "0.95", "--x0", "0.3,0.5",
            "--trace", "run/trace.csv",
        ],
        dir.path(),
    );
    assert!(verify.status.success(), "{}", stdout(&verify));
    let text = stdout(&verify);
    assert!(text.contains("bit-exactly"));
    assert!(text.contains("minty-retention"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_detects_tampered_trace() {
    let dir = tempfile::tempdir().unwrap();
    minty(
        &["solve", "--problem", "quasimonotone-vi", "--theta", "0.95", "--x0", "0,0", "--out", "run"],
        dir.path(),
    );
    let path = dir.path().join("run/trace.csv");
    let mut text = std::fs::read_to_string(&path).unwrap();
    // Perturb one E value.
    text = text.replacen("5.3877388435194706e-1", "5.4000000000000000e-1", 1);
    std::fs::write(&path, text).unwrap();

    let verify = minty(
        &["verify", "--problem", "quasimonotone-vi", "--theta", "0.95", "--x0", "0,0",
          "--trace", "run/trace.csv"],
        dir.path(),
    );
    assert_eq!(verify.status.code(), Some(1));
    assert!(stdout(&verify).contains("replay mismatch"));
}

#[test]
fn bad_flags_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown problem.
    let out = minty(&["solve", "--problem", "mystery"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // alg2 on a bifunction-only problem.
    let out = minty(
        &["solve", "--problem", "nash-cournot", "--algorithm", "alg2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // Malformed beta schedule.
    let out = minty(
        &["solve", "--problem", "quasimonotone-vi", "--beta", "linear:3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // Infeasible start.
    let out = minty(
        &["solve", "--problem", "quasimonotone-vi", "--x0", "5,5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn iteration_limit_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = minty(
        &[
            "solve", "--problem", "quasimonotone-vi", "--theta", "0.95", "--x0", "0,0",
            "--max-iters", "2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("IterationLimit"));
}

#[test]
fn params_file_feeds_the_market_model() {
    let dir = tempfile::tempdir().unwrap();
    // Default parameters written to a file must reproduce the default run.
    let params = minty::problems::NashCournotParams::default().to_table_string();
    std::fs::write(dir.path().join("market.txt"), params).unwrap();

    let a = minty(
        &["solve", "--problem", "nash-cournot", "--theta", "0.5", "--max-iters", "400"],
        dir.path(),
    );
    let b = minty(
        &[
            "solve", "--problem", "nash-cournot", "--theta", "0.5", "--max-iters", "400",
            "--params", "market.txt",
        ],
        dir.path(),
    );
    assert!(a.status.success());
    assert!(b.status.success());
    let strip = |s: String| s.lines().next().unwrap().split(" wall_s=").next().unwrap().to_string();
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}
