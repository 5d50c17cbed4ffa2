//! End-to-end runs of the built binary: byte-determinism of outputs, config
//! parsing, and the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

fn butterflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_butterflow"))
        .args(args)
        .current_dir(dir)
        .env_remove("BUTTERFLOW_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn golden_trace_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--variant",
        "butterfly1",
        "--rate1",
        "1",
        "--rate2",
        "1",
        "--seed",
        "1",
        "--out",
        "golden.csv",
    ];
    let first = butterflow(&args, dir.path());
    assert!(first.status.success(), "{first:?}");
    let bytes_first = std::fs::read(dir.path().join("golden.csv")).unwrap();
    assert_eq!(
        String::from_utf8(bytes_first.clone()).unwrap(),
        "edge,slot,symbol\n1,0,1\n2,0,0\n3,0,1\n4,0,1\n5,0,0\n6,0,1\n7,0,1\n"
    );

    let second = butterflow(&args, dir.path());
    let bytes_second = std::fs::read(dir.path().join("golden.csv")).unwrap();
    assert_eq!(bytes_first, bytes_second);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn config_file_drives_a_full_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        r#"
variant = "butterfly2"
q = 2
secure = true
seed = 9
rate1 = "1/2"
rate2 = "1/2"
out = "t.csv"

[capacities]
"1" = 1
"2" = 1
"3" = "3/2"
"4" = 1
"5" = 1
"6" = 1
"7" = 1
"#,
    )
    .unwrap();
    let run = butterflow(&["--config", "run.toml", "simulate"], dir.path());
    assert!(run.status.success(), "{run:?}");
    assert!(stdout(&run).contains("secure: true"));
    assert!(dir.path().join("t.csv").exists());

    // The audit of the same configuration passes and reports zero leakage.
    let audit = butterflow(&["--config", "run.toml", "audit"], dir.path());
    assert!(audit.status.success());
    assert!(stdout(&audit).contains("verdict: PASS"));

    // A flag override pushes the rate outside the region.
    let pushed = butterflow(
        &["--config", "run.toml", "simulate", "--rate1", "2"],
        dir.path(),
    );
    assert_eq!(pushed.status.code(), Some(3));
}

#[test]
fn secure_butterfly1_region_collapses_to_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let run = butterflow(
        &["region", "--variant", "butterfly1", "--secure", "--out", "r.csv"],
        dir.path(),
    );
    assert!(run.status.success(), "{run:?}");
    let text = stdout(&run);
    assert!(text.contains("no positive-rate secure scheme"));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("r.csv")).unwrap(),
        "r1,r2\n0,0\n"
    );
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = tempfile::tempdir().unwrap();

    std::fs::write(dir.path().join("bad.toml"), "variant = \"butterfly1\"\nwat = 1\n").unwrap();
    let unknown_key = butterflow(&["--config", "bad.toml", "region"], dir.path());
    assert_eq!(unknown_key.status.code(), Some(2));

    std::fs::write(dir.path().join("badcap.toml"), "variant = \"butterfly1\"\n[capacities]\n\"1+2\" = 1\n").unwrap();
    let wrong_label = butterflow(&["--config", "badcap.toml", "region"], dir.path());
    assert_eq!(wrong_label.status.code(), Some(2));

    let infeasible = butterflow(
        &["simulate", "--variant", "butterfly1", "--rate1", "9", "--rate2", "0"],
        dir.path(),
    );
    assert_eq!(infeasible.status.code(), Some(3));
    let message = String::from_utf8(infeasible.stderr).unwrap();
    assert!(message.contains("R1 <="), "{message}");

    let secure_bf1 = butterflow(
        &["simulate", "--variant", "butterfly1", "--secure", "--rate1", "0", "--rate2", "0"],
        dir.path(),
    );
    assert_eq!(secure_bf1.status.code(), Some(4));

    let budget = Command::new(env!("CARGO_BIN_EXE_butterflow"))
        .args(["audit", "--variant", "butterfly2", "--secure", "--rate1", "1", "--rate2", "0"])
        .current_dir(dir.path())
        .env("BUTTERFLOW_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(5));

    let unsupported = butterflow(&["region", "--variant", "grid"], dir.path());
    assert_eq!(unsupported.status.code(), Some(6));
}

#[test]
fn leaky_plan_audit_completes_and_names_the_edge() {
    let dir = tempfile::tempdir().unwrap();
    let run = butterflow(
        &["audit", "--variant", "butterfly1", "--rate1", "1", "--rate2", "1"],
        dir.path(),
    );
    assert!(run.status.success(), "a completed audit is not an error");
    let text = stdout(&run);
    assert!(text.contains("verdict: FAIL (first leaking edge: 1)"), "{text}");
    assert!(text.contains("edge 3: LEAKS"));
}

#[test]
fn impossibility_prefix_scan_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["impossibility", "--limit", "2097152"];
    let first = butterflow(&args, dir.path());
    assert!(first.status.success());
    let second = butterflow(&args, dir.path());
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout(&first).contains("secure with positive rate: 0"));
}

#[test]
fn region_csv_matches_the_printed_corners() {
    let dir = tempfile::tempdir().unwrap();
    let run = butterflow(
        &[
            "region",
            "--variant",
            "colocated-sinks",
            "--cap",
            "3=1/2",
            "--out",
            "cs.csv",
        ],
        dir.path(),
    );
    assert!(run.status.success(), "{run:?}");
    let csv = std::fs::read_to_string(dir.path().join("cs.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r1,r2"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    let printed = stdout(&run);
    for row in rows {
        let (r1, r2) = row.split_once(',').unwrap();
        assert!(
            printed.contains(&format!("({r1}, {r2})")),
            "row {row} missing from stdout: {printed}"
        );
    }
}
