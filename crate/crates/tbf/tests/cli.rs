use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use tbf::acceptance::{run_criteria, Suite};
use tbf_core::Caps;

fn corpus(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(file)
}

fn tbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbf"))
        .args(args)
        .env_remove("TBF_CAPS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr_json(o: &Output) -> Value {
    let err = String::from_utf8_lossy(&o.stderr);
    let line = err.lines().find(|l| l.starts_with('{')).unwrap_or_else(|| panic!("no failure record in {err}"));
    serde_json::from_str(line).expect("failure record is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn s3_identity_tbft_table() {
    let (g, e) = (corpus("s3.json"), corpus("s3_identity.json"));
    let o = tbf(&["finite", "--group", path(&g), "--endo", path(&e), "--tbft", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    // S3 has three conjugacy classes and three irreducible characters
    for n in 1..=3 {
        assert!(out.contains(&format!("{n:>4}{:>8}{:>8}", 3, 3)), "{out}");
    }
    assert!(out.contains("tbft: pass"));
}

#[test]
fn doubling_map_sequence() {
    let o = tbf(&["abelian", "--matrix", "[[2]]", "--sequence", "5", "--congruence", "5", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sections = v["sections"].as_array().unwrap();
    let seq = sections.iter().find(|s| s["type"] == "sequence").unwrap();
    // |1 - 2^n|
    assert_eq!(seq["R"], serde_json::json!([1, 3, 7, 15, 31]));
    let cong = sections.iter().find(|s| s["type"] == "congruence").unwrap();
    assert_eq!(cong["pass"], true);
    // P_n/n for 2^n - 1: 1, 1, 2, 3, 6 (necklace counts)
    let orbits: Vec<i64> = cong["orbits"].as_array().unwrap().iter().map(|o| o["count"].as_i64().unwrap()).collect();
    assert_eq!(orbits, [1, 1, 2, 3, 6]);
    assert_eq!(v["pass"], true);
}

#[test]
fn broken_endomorphism_is_an_input_error() {
    let (g, e) = (corpus("s3.json"), corpus("s3_broken.json"));
    let o = tbf(&["finite", "--group", path(&g), "--endo", path(&e)]);
    assert_eq!(code(&o), 2);
    let rec = stderr_json(&o);
    assert_eq!(rec["error"], "NotAHomomorphism");
    assert!(rec["witness"]["x"].is_u64() && rec["witness"]["y"].is_u64());
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"kind\": \"cayley\",\n  \"table\": [[0, 1], [1 0]]\n}\n").unwrap();
    let o = tbf(&["finite", "--group", path(&bad)]);
    assert_eq!(code(&o), 2);
    let rec = stderr_json(&o);
    assert_eq!(rec["error"], "ParseError");
    assert!(rec["message"].as_str().unwrap().contains("line 3"), "{rec}");
}

#[test]
fn not_a_group_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("g.json");
    // 1·1 = 1 leaves 1 without an inverse
    std::fs::write(&bad, r#"{ "kind": "cayley", "table": [[0, 1], [1, 1]] }"#).unwrap();
    let o = tbf(&["finite", "--group", path(&bad)]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["error"], "NotAGroup");
}

#[test]
fn malformed_matrix_literal() {
    let o = tbf(&["abelian", "--matrix", "[[1, 2], [3]]"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["error"], "ParseError");
}

#[test]
fn infinite_count_is_reported_not_failed() {
    let o = tbf(&["abelian", "--matrix", "[[1,0],[0,1]]"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("R(phi) = infinite"));
}

#[test]
fn congruence_on_infinite_term_fails_verification() {
    let o = tbf(&["abelian", "--matrix", "[[-1]]", "--congruence", "3"]);
    // R(phi^2) = |det(I - I)| is infinite
    assert_eq!(code(&o), 1);
    assert_eq!(stderr_json(&o)["error"], "VerificationFailure");
}

#[test]
fn exported_group_reproduces_results() {
    let dir = tempfile::tempdir().unwrap();
    let (exported, table) = (dir.path().join("s3_cayley.json"), dir.path().join("table.json"));
    let g = corpus("s3.json");
    let first = tbf(&[
        "finite",
        "--group",
        path(&g),
        "--tbft",
        "4",
        "--format",
        "json",
        "--export-group",
        path(&exported),
        "--export-table",
        path(&table),
    ]);
    assert_eq!(code(&first), 0);
    let def: Value = serde_json::from_str(&std::fs::read_to_string(&exported).unwrap()).unwrap();
    assert_eq!(def["kind"], "cayley");
    let second = tbf(&["finite", "--group", path(&exported), "--tbft", "4", "--format", "json"]);
    assert_eq!(code(&second), 0);
    let strip = |o: &Output| {
        let mut v: Value = serde_json::from_str(&stdout(o)).unwrap();
        v["job"] = Value::Null;
        v
    };
    assert_eq!(strip(&first), strip(&second));

    let t: Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(t["degrees"], serde_json::json!([1, 1, 2]));
    assert_eq!(t["class_sizes"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).sum::<u64>(), 6);
}

#[test]
fn csv_congruence_layout() {
    let o = tbf(&["abelian", "--matrix", "[[3]]", "--congruence", "3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("n,R,S_n,S_n mod n,P_n,P_n/n"), "{out}");
    // R(phi^n) = 3^n - 1: 2, 8, 26; P_2 = 8 - 2 = 6, P_3 = 26 - 2 = 24
    assert!(out.contains("2,8,6,0,6,3"), "{out}");
    assert!(out.contains("3,26,24,0,24,8"), "{out}");
}

#[test]
fn extension_count_and_certificate() {
    let ext = corpus("z2_minus_identity_m2.json");
    let o = tbf(&["extension", "--group", path(&ext), "--certify", "--separate", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sections = v["sections"].as_array().unwrap();
    let classes = sections.iter().find(|s| s["type"] == "reidemeister").unwrap();
    assert_eq!(classes["R"], 6);
    let cert = sections.iter().find(|s| s["type"] == "certificate").unwrap();
    assert_eq!(cert["certified"], true);
    assert_eq!(cert["R"], cert["fixed_characters"]);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let o = tbf(&["abelian", "--matrix", "[[2,1],[1,1]]", "--out", path(&out)]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().contains("R(phi) = 1"));
}

#[test]
fn caps_from_environment() {
    let g = corpus("s3.json");
    let small = Command::new(env!("CARGO_BIN_EXE_tbf"))
        .args(["finite", "--group", path(&g)])
        .env("TBF_CAPS", "closure=4")
        .output()
        .unwrap();
    assert_eq!(code(&small), 2);
    assert_eq!(stderr_json(&small)["error"], "CapExceeded");
    let garbage = Command::new(env!("CARGO_BIN_EXE_tbf"))
        .args(["finite", "--group", path(&g)])
        .env("TBF_CAPS", "closure")
        .output()
        .unwrap();
    assert_eq!(code(&garbage), 2);
}

#[test]
fn empty_corpus_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = tbf(&["corpus", "--dir", path(dir.path())]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!(stdout(&o).contains("jobs: 0 run"));
}

#[test]
fn bundled_corpus_jobs_pass() {
    let o = tbf(&["corpus", "--dir", path(&corpus("")), "--workers", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    let jobs = std::fs::read_dir(corpus("")).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".job.json")).count();
    assert!(out.contains(&format!("jobs: {jobs} run, {jobs} passed, 0 failed")), "{out}");
}

#[test]
fn failed_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("wrong.job.json"),
        r#"{ "kind": "abelian", "matrix": "[[2]]", "commands": ["reidemeister"], "expect": { "sequence": [1, 3, 8] } }"#,
    )
    .unwrap();
    let o = tbf(&["corpus", "--dir", path(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("expected R(phi^3)"));
}

#[test]
fn unknown_command_for_kind_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.job.json"),
        r#"{ "kind": "abelian", "matrix": "[[2]]", "commands": ["certify"] }"#,
    )
    .unwrap();
    let o = tbf(&["corpus", "--dir", path(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("\"ParseError\""));
}

#[test]
fn smoke_suite_is_quick() {
    let start = Instant::now();
    let results = run_criteria(Suite::Smoke, &Caps::default());
    assert!(results.iter().all(|r| r.pass()), "{results:?}");
    assert!(start.elapsed().as_secs() < 10);
}
