use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn slicesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicesim"))
        .args(args)
        .current_dir(root())
        .env_remove("SLICESIM_GOLDEN_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_ok() {
    let o = slicesim(&["validate", "scenarios/case_1a.toml"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "OK");
}

#[test]
fn validate_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(root().join("scenarios/case_1b.toml"))
        .unwrap()
        .replace("ue_id = \"u1\"\nsnssai", "ue_id = \"ghost\"\nsnssai");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let o = slicesim(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("referential-integrity"), "{}", stdout(&o));
}

#[test]
fn validate_reports_parse_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "[plmn]\nslices = [\nconfigured = 1\n").unwrap();
    let o = slicesim(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line "));
}

#[test]
fn run_1b_matches_golden_via_case_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.trace");
    let metrics = dir.path().join("m.csv");
    let o = slicesim(&[
        "run",
        "scenarios/case_1b.toml",
        "--trace-out",
        trace.to_str().unwrap(),
        "--metrics-out",
        metrics.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = slicesim(&["diff-golden", trace.to_str().unwrap(), "--case", "1b"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(metrics).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("case_1b,0,1,u1,1b,Switched,21,32,"));
}

#[test]
fn seed_does_not_change_default_output() {
    let a = slicesim(&["run", "scenarios/case_2c.toml", "--seed", "1"]);
    let b = slicesim(&["run", "scenarios/case_2c.toml", "--seed", "12345"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn all_cases_metrics_cover_every_case() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = dir.path().join("m.csv");
    let o = slicesim(&["run", "scenarios/all_cases.toml", "--metrics-out", metrics.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(metrics).unwrap();
    let cases: Vec<String> = csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap().to_string()).collect();
    let want = ["1a", "1b", "1c", "1d", "1e", "1f", "2a", "2b", "2c", "2bT", "2cT", "-"];
    assert_eq!(cases, want);
}

#[test]
fn diff_golden_reports_first_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let golden = std::fs::read_to_string(root().join("golden/case_2b.trace")).unwrap();
    let mut lines: Vec<&str> = golden.lines().collect();
    // swap the last release line with the registration request
    let rel = lines.iter().position(|l| l.contains("|PduSessionReleaseComplete|")).unwrap();
    lines.swap(rel, rel + 1);
    let path = dir.path().join("swapped.trace");
    std::fs::write(&path, lines.join("\n")).unwrap();
    let o = slicesim(&["diff-golden", path.to_str().unwrap(), "golden/case_2b.trace"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains(&format!("line {}", rel + 1)), "{}", stdout(&o));
}

#[test]
fn diff_golden_rejects_malformed_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.trace");
    std::fs::write(&path, "1|2|MessageDelivery\n").unwrap();
    let o = slicesim(&["diff-golden", path.to_str().unwrap(), "golden/case_1a.trace"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("field"));
}

#[test]
fn golden_dir_env_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("case_1a.trace"), "").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_slicesim"))
        .args(["diff-golden", "golden/case_1a.trace", "--case", "1a"])
        .current_dir(root())
        .env("SLICESIM_GOLDEN_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_parallel_equals_sequential() {
    let args = |jobs: &'static str| {
        vec![
            "sweep",
            "scenarios/case_1a.toml",
            "scenarios/case_2cT.toml",
            "--seeds",
            "3",
            "--jobs",
            jobs,
        ]
    };
    let a = slicesim(&args("1"));
    let b = slicesim(&args("4"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().filter(|l| l.starts_with("scenario,")).count(), 1);
    assert_eq!(stdout(&a).lines().count(), 1 + 2 * 3 * 2);
}
