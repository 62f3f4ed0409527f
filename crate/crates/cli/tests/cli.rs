use std::process::{Command, Output};

fn charex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charex"))
        .args(args)
        .output()
        .expect("spawn charex")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_lists_every_subcommand() {
    let out = charex(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for cmd in ["theta", "check", "lemma1", "verify-cf", "moments", "pdf", "sample", "renyi"] {
        assert!(text.contains(cmd), "missing {cmd} in help:\n{text}");
    }
    assert!(text.contains("CHAREX_THREADS"));
}

#[test]
fn validation_failures_exit_2() {
    let cases: &[&[&str]] = &[
        &["theta", "--mu", "1,1"],
        &["theta", "--mu", "0,2"],
        &["theta", "--mu", "1,0.5"],
        &["theta", "--mu", "1,-2", "--family", "laplace"],
        &["theta", "--mu", "1,2", "--bogus"],
        &["pdf", "--mu", "1,2", "--lambda", "-1", "--x", "0"],
        &["renyi", "--size", "3", "--rank", "3"],
        &["verify-cf", "--model", "exp:0", "--phisa"],
        &["verify-cf", "--model", "exp:1"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = charex(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn bad_thread_count_is_a_validation_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_charex"))
        .args(["theta", "--mu", "1,2"])
        .env("CHAREX_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inconsistent_recursion_exits_3() {
    let out = charex(&["moments", "--mu", "1,2", "--family", "laplace", "--seed-moment", "1=1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2"));

    // singular step on (1,-1) with no seed for degree 3
    let out = charex(&["moments", "--mu", "1,-1", "--seed-moment", "1=1", "--m-max", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn table_output_is_human_readable() {
    let out = charex(&["theta", "--mu", "1,2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("-1") && text.contains("2"));
    assert!(!text.trim_start().starts_with('{'));

    let out = charex(&["check", "--mu", "1,-1"]);
    assert!(stdout(&out).contains("FailAt(3)"));
}

#[test]
fn json_mode_emits_one_object_per_line() {
    let out = charex(&["--format", "json", "lemma1", "--mu", "1,2,-3", "--m-max", "8"]);
    assert!(out.status.success());
    let lines: Vec<_> = stdout(&out).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 9);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["holds"], true);
    }
}

#[test]
fn sample_encodings_agree() {
    let dir = std::env::temp_dir().join(format!("charex-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bin = dir.join("s.bin");
    let common = ["sample", "--mu", "1,-1/2", "--lambda", "2", "--n-samples", "1000", "--seed", "11"];

    let text = charex(&common);
    let decoded: Vec<f64> = stdout(&text).lines().map(|l| l.parse().unwrap()).collect();

    let mut args = common.to_vec();
    args.extend(["--encoding", "binary", "--out", bin.to_str().unwrap(), "--format", "json"]);
    let summary = charex(&args);
    assert!(summary.status.success());
    let report: serde_json::Value = serde_json::from_str(stdout(&summary).trim()).unwrap();
    assert_eq!(report["n_samples"], 1000);
    assert_eq!(report["expected_mean"], 0.25);

    let raw = std::fs::read(&bin).unwrap();
    let binary: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    assert_eq!(binary, decoded);
    std::fs::remove_dir_all(&dir).ok();
}
