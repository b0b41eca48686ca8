use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn majorant(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_majorant"))
        .current_dir(dir)
        .env_remove("MAJORANT_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_out(dir: &Path, args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.push("--json");
    let out = majorant(dir, &full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn manifests(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir.join("runs"))
        .map(|rd| rd.map(|e| e.unwrap().path()).collect())
        .unwrap_or_default();
    v.sort();
    v
}

#[test]
fn norm_of_all_plus_at_four_is_exact() {
    let t = TempDir::new().unwrap();
    let v = json_out(t.path(), &["norm", "--poly", "0:1,1:1,3:1", "--p", "4"]);
    assert_eq!(v["estimate"]["method"], "even-exact");
    let value = v["estimate"]["value"].as_f64().unwrap();
    assert_eq!(value.powi(4).round(), 15.0);
    assert!((value.powi(4) - 15.0).abs() < 1e-12);
}

#[test]
fn force_quadrature_switches_method() {
    let t = TempDir::new().unwrap();
    let v = json_out(t.path(), &["norm", "--poly", "0:1,1:1,3:1", "--p", "4", "--force-quadrature"]);
    assert_eq!(v["estimate"]["method"], "quadrature");
    assert!((v["estimate"]["value"].as_f64().unwrap() - 15f64.powf(0.25)).abs() < 1e-12);
}

#[test]
fn norm_of_constant_is_one() {
    let t = TempDir::new().unwrap();
    let v = json_out(t.path(), &["norm", "--poly", "0:1", "--p", "3"]);
    assert!((v["estimate"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn signed_cube_norm_exceeds_unsigned() {
    let t = TempDir::new().unwrap();
    let plus = json_out(t.path(), &["norm", "--poly", "0:1,1:1,3:1", "--p", "3"]);
    let minus = json_out(t.path(), &["norm", "--poly", "0:1,1:1,3:-1", "--p", "3"]);
    assert!(minus["estimate"]["value"].as_f64() > plus["estimate"]["value"].as_f64());
}

#[test]
fn poly_file_input() {
    let t = TempDir::new().unwrap();
    std::fs::write(t.path().join("q.json"), "[[0, 1, 0], [1, 1, 0], [3, -1, 0]]").unwrap();
    let a = json_out(t.path(), &["norm", "--poly-file", "q.json", "--p", "3"]);
    let b = json_out(t.path(), &["norm", "--poly", "0:1,1:1,3:-1", "--p", "3"]);
    assert_eq!(a["estimate"], b["estimate"]);
}

#[test]
fn construct_reports_set_and_ratio() {
    let t = TempDir::new().unwrap();
    let v = json_out(t.path(), &["construct", "--D", "10", "--k", "2"]);
    assert_eq!(v["size"], 9);
    assert!(v["ratio"].as_f64().unwrap() > 1.0);
    let v = json_out(t.path(), &["construct", "--D", "4", "--k", "1"]);
    assert_eq!(v["lambda"], serde_json::json!([0, 1, 3]));
    let v = json_out(t.path(), &["construct", "--D", "10", "--target-n", "999"]);
    assert_eq!(v["k"], 2);
}

#[test]
fn exit_codes() {
    let t = TempDir::new().unwrap();
    let code = |args: &[&str]| majorant(t.path(), args).status.code();
    assert_eq!(code(&["construct", "--D", "3", "--k", "2"]), Some(2));
    assert_eq!(code(&["norm", "--poly", "0:1,1:x", "--p", "3"]), Some(2));
    assert_eq!(code(&["norm", "--p", "3"]), Some(2));
    assert_eq!(code(&["lemma", "--poly", "0:1", "--alpha", "0.5", "--D", "8"]), Some(2));
    assert_eq!(code(&["search", "--lambda", "0,1,3", "--budget", "2"]), Some(2));
    assert_eq!(code(&["lemma", "--poly", "0:1,1:1,3:1", "--D", "64", "--strict"]), Some(1));
    assert_eq!(code(&["norm", "--poly", "0:1", "--p", "3"]), Some(0));
}

#[test]
fn parse_errors_name_the_column() {
    let t = TempDir::new().unwrap();
    let out = majorant(t.path(), &["norm", "--poly", "0:1,1:x", "--p", "3"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 7"));
}

#[test]
fn search_finds_boas_pattern() {
    let t = TempDir::new().unwrap();
    let v = json_out(t.path(), &["search", "--lambda", "0,1,3", "--p", "3"]);
    assert_eq!(v["best_pattern"], serde_json::json!([0, 0, 1]));
    assert!(v["best_ratio"].as_f64().unwrap() > 1.0);
}

#[test]
fn ascent_is_seeded() {
    let t = TempDir::new().unwrap();
    let args = ["search", "--lambda", "0,1,3,7", "--method", "ascent", "--restarts", "2", "--seed", "7"];
    let a = json_out(t.path(), &args);
    let b = json_out(t.path(), &args);
    assert_eq!(a, b);
}

#[test]
fn lemma_brackets_target() {
    let t = TempDir::new().unwrap();
    let v = json_out(t.path(), &["lemma", "--poly", "0:1,1:1,3:-1", "--D", "128", "--k", "2"]);
    assert_eq!(v["contains_target"], true);
    assert_eq!(v["certified"], true);
    let v = json_out(t.path(), &["lemma", "--poly", "0:1,1:1,3:-1", "--alpha", "0.5", "--D", "128", "--best-effort"]);
    assert_eq!(v["certified"], false);
}

#[test]
fn bounds_single_and_batch() {
    let t = TempDir::new().unwrap();
    let v = json_out(t.path(), &["bounds", "--lambda", "0,1,3,7"]);
    assert_eq!(v["holds"], true);
    assert_eq!(v["upper_exponent"], "1/18");
    let out = majorant(t.path(), &["bounds", "--random", "6", "--csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("index,"));
}

#[test]
fn every_command_writes_a_manifest() {
    let t = TempDir::new().unwrap();
    majorant(t.path(), &["norm", "--poly", "0:1", "--p", "3"]);
    majorant(t.path(), &["construct", "--D", "4", "--k", "1"]);
    majorant(t.path(), &["search", "--lambda", "0,1", "--p", "3"]);
    majorant(t.path(), &["lemma", "--poly", "0:1,1:1", "--D", "16"]);
    majorant(t.path(), &["bounds", "--lambda", "0,1"]);
    let files = manifests(t.path());
    assert_eq!(files.len(), 5);
    for f in files {
        let m: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
        for key in ["command", "parameters", "seed", "tool_version", "timestamp", "results"] {
            assert!(m.get(key).is_some(), "{} lacks {key}", f.display());
        }
    }
}

#[test]
fn report_reprints_the_summary() {
    let t = TempDir::new().unwrap();
    let out = majorant(t.path(), &["construct", "--D", "8", "--k", "2", "--manifest", "c.json"]);
    assert!(out.status.success());
    let again = majorant(t.path(), &["report", "c.json"]);
    assert_eq!(out.stdout, again.stdout);
    let out = majorant(t.path(), &["bounds", "--random", "4", "--csv", "--manifest", "b.json"]);
    let again = majorant(t.path(), &["report", "b.json", "--csv"]);
    let tail: String = String::from_utf8(again.stdout).unwrap().lines().skip(1).map(|l| {
        let l = l.splitn(3, ',').nth(2).unwrap().to_string();
        l + "\n"
    }).collect();
    let body: String = String::from_utf8(out.stdout).unwrap().lines().skip(1).map(|l| format!("{l}\n")).collect();
    assert_eq!(tail, body);
}

#[test]
fn tampered_manifest_fails_verification() {
    let t = TempDir::new().unwrap();
    majorant(t.path(), &["norm", "--poly", "0:1,1:1,3:1", "--p", "4", "--manifest", "n.json"]);
    let path = t.path().join("n.json");
    let mut m: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(majorant(t.path(), &["report", "--verify", "n.json"]).status.code(), Some(0));
    let v = m["results"]["estimate"]["value"].as_f64().unwrap();
    m["results"]["estimate"]["value"] = serde_json::json!(f64::from_bits(v.to_bits() + 1));
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let out = majorant(t.path(), &["report", "--verify", "n.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/estimate/value"));
}

#[test]
fn threads_env_fallback() {
    let t = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_majorant"))
        .current_dir(t.path())
        .env("MAJORANT_THREADS", "0")
        .args(["norm", "--poly", "0:1", "--p", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
