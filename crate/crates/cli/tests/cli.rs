use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn traceai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_traceai"))
        .args(args)
        .output()
        .expect("spawn traceai")
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn safe_program_exits_zero_and_writes_stats() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.json");
    let file = corpus("running_example.imp");
    let out = traceai(&[
        "verify",
        file.to_str().unwrap(),
        "--domain",
        "interval",
        "--stats",
        stats.to_str().unwrap(),
        "--dot",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).starts_with("SAFE "));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(v["verdict"], "SAFE");
    assert_eq!(v["total_refinements"], 2);
    assert_eq!(v["ai_refinements"], 1);
    assert_eq!(v["useful_ai_refinements"], 1);
    assert_eq!(v["iterations"].as_array().unwrap().len(), 2);
    assert_eq!(v["iterations"][1]["ai_safe"], true);
    let dot = std::fs::read_to_string(dir.path().join("running_example.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
}

#[test]
fn unsafe_program_exits_one_with_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let cex = dir.path().join("cex.txt");
    let file = corpus("simple_bug.imp");
    let out = traceai(&[
        "verify",
        file.to_str().unwrap(),
        "--jobs",
        "1",
        "--cex",
        cex.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("UNSAFE "));
    let text = std::fs::read_to_string(&cex).unwrap();
    assert!(text.contains("havoc"), "{text}");
    assert!(text.contains("x=6"), "{text}");
}

#[test]
fn iteration_limit_exits_two() {
    let file = corpus("running_example.imp");
    let out = traceai(&[
        "verify",
        file.to_str().unwrap(),
        "--no-ai",
        "--max-iter",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("UNKNOWN "));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteration limit"));
}

#[test]
fn bad_input_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.imp");
    std::fs::write(&bad, "var x; x := ;").unwrap();
    let out = traceai(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = traceai(&[
        "verify",
        corpus("simple_bug.imp").to_str().unwrap(),
        "--domain",
        "polyhedra",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = traceai(&["verify", dir.path().join("missing.imp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_reports_wrong_headers() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("a.imp"),
        "// @expect safe\nvar x; x := 1; assert(x == 1);",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("b.imp"),
        "// @expect unsafe\nvar x; x := 1; assert(x == 1);",
    )
    .unwrap();
    std::fs::write(dir.path().join("c.imp"), "var x; x := 1;").unwrap();
    let csv = dir.path().join("out.csv");
    let summary = dir.path().join("summary.csv");
    let out = traceai(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--settings",
        "ta,interval",
        "--csv",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wrong verdict: b.imp"));
    let csv = std::fs::read_to_string(csv).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    let summary = std::fs::read_to_string(summary).unwrap();
    assert!(summary.contains("ta,1,0,2,0"), "{summary}");
    assert!(summary.contains("Portfolio,1,0,2,0"), "{summary}");
}

#[test]
fn bench_rejects_unknown_settings() {
    let dir = tempfile::tempdir().unwrap();
    let out = traceai(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--settings",
        "ta,boxes",
    ]);
    assert_eq!(out.status.code(), Some(3));
}
