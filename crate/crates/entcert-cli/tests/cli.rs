use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn entcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entcert")).args(args).env_remove("ENTCERT_TOL").output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = entcert(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = entcert(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("entcert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn white_file(n: usize) -> PathBuf {
    let d = 1usize << n;
    let entries: Vec<[f64; 2]> = (0..d * d).map(|i| if i % (d + 1) == 0 { [1.0 / d as f64, 0.0] } else { [0.0, 0.0] }).collect();
    let doc = serde_json::json!({"n_qubits": n, "kind": "dense", "entries": entries});
    temp_file(&format!("white{n}.json"), &doc.to_string())
}

#[test]
fn analyze_smolin_split_pattern() {
    let r = json_ok(&["analyze", "smolin", "--splits", "all"]);
    let verdicts = r["verdicts"].as_array().unwrap();
    let split_violated = |label: &str| {
        verdicts.iter().filter(|v| v["target"].as_str().unwrap().starts_with(&format!("{label}:"))).any(|v| v["violated"] == true)
    };
    assert!(split_violated("a-(bcd)"));
    assert!(split_violated("(abc)-d"));
    assert!(!split_violated("(ab)-(cd)"));
    assert!(!split_violated("(ad)-(bc)"));
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert!(r["tolerances"]["criterion"].is_number());
}

#[test]
fn analyze_ghz_level_and_white_file() {
    assert_eq!(json_ok(&["analyze", "named:ghz", "n=3", "--level", "2"])["violated"], true);
    let path = white_file(3);
    let r = json_ok(&["analyze", path.to_str().unwrap()]);
    assert_eq!(r["violated"], false);
    assert_eq!(r["n_qubits"], 3);
    let chain = json_ok(&["analyze", "ghz", "n=3", "--chain"]);
    assert_eq!(chain["chain"].as_array().unwrap().len(), 4);
}

#[test]
fn robustness_examples() {
    let p0 = |args: &[&str]| json_ok(args)["p0"].as_f64().unwrap();
    assert!((p0(&["robustness", "ghz", "n=4", "--noise", "white", "--criterion", "full"]) - 8.0 / 15.0).abs() < 1e-8);
    assert!((p0(&["robustness", "bound_dur", "n=4", "--noise", "white", "--criterion", "some"]) - 8.0 / 13.0).abs() < 1e-8);
    assert!((p0(&["robustness", "dicke", "n=4", "l=2", "rotated", "--criterion", "full"]) - 4.0 / 11.0).abs() < 1e-8);
    let raw = stdout_ok(&["robustness", "ghz", "n=3"]);
    assert_eq!(raw.matches("\n  \"state\":").count(), 1, "header keys repeated:\n{raw}");
    let raw = stdout_ok(&["classify", "smolin"]);
    assert_eq!(raw.matches("\n  \"n_qubits\":").count(), 1, "header keys repeated:\n{raw}");
    let csv = stdout_ok(&["robustness", "ghz", "n=3", "--noise", "dephase", "--criterion", "some", "--format", "csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,state,channel,criterion,p0,method"));
    assert!(lines.next().unwrap().starts_with("3,ghz n=3,dephase,some,"));
}

#[test]
fn settings_examples() {
    let count = |args: &[&str]| json_ok(args)["count"].as_u64().unwrap();
    assert_eq!(count(&["settings", "ghz", "n=4"]), 5);
    let fs = json_ok(&["settings", "four_singlet"]);
    assert_eq!(fs["count"], 5);
    assert_eq!(fs["target_row"], 4);
    let path = white_file(3);
    assert_eq!(count(&["settings", path.to_str().unwrap()]), 9);
    assert_eq!(count(&["settings", "ghz", "n=3", "--profile", "general"]), 7);
}

#[test]
fn classify_examples() {
    let r = json_ok(&["classify", "ghz", "n=3"]);
    let consistent: Vec<&str> =
        r["classes"].as_array().unwrap().iter().filter(|c| c["status"] == "consistent").map(|c| c["class"].as_str().unwrap()).collect();
    assert_eq!(consistent, ["1"]);
    let dc = json_ok(&["classify", "rho3_i", "--method", "dc"]);
    assert_eq!(dc["depolarized"], false);
    let scan = json_ok(&["classify", "bound_dur", "n=4"]);
    assert_eq!(scan["k_bracket"], serde_json::json!([1, 2]));
}

#[test]
fn tables_and_figures() {
    let t1 = stdout_ok(&["tables", "--which", "tabel1"]);
    let rows: Vec<&str> = t1.lines().collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0].split(',').count(), 8);
    let t2 = stdout_ok(&["tables", "--which", "tabel2"]);
    assert_eq!(t2.lines().count(), 3);
    assert_eq!(t2, stdout_ok(&["tables", "--which", "tabel2"]));

    let out = std::env::temp_dir().join(format!("entcert-fig-{}.csv", std::process::id()));
    stdout_ok(&["figures", "--which", "ghz-noise", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("N,full,all_splits,stabilizer_full,stabilizer_some\n"));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn ghz_table_covers_grid() {
    let t = stdout_ok(&["tables", "--which", "ghz"]);
    assert_eq!(t.lines().count(), 1 + 7 * 5 * 3);
    assert!(t.contains("4,ghz4,white,full,0.5333333333,closed-form"));
}

#[test]
fn exit_codes() {
    assert_eq!(entcert(&["robustness", "ghz", "--noise", "pink"]).status.code(), Some(2));
    assert_eq!(entcert(&["robustness", "ghz", "--criterion", "most"]).status.code(), Some(2));
    assert_eq!(entcert(&["analyze", "ghz", "colour=blue"]).status.code(), Some(2));
    assert_eq!(entcert(&["tables", "--which", "nope"]).status.code(), Some(2));
    assert_eq!(entcert(&["frobnicate"]).status.code(), Some(2));
    let bad = temp_file("bad.json", r#"{"n_qubits": 1, "kind": "dense", "entries": [[2,0],[0,0],[0,0],[-1,0]]}"#);
    assert_eq!(entcert(&["analyze", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(entcert(&["robustness", "white", "n=3"]).status.code(), Some(1));
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_entcert")).args(["analyze", "ghz", "n=3"]).env("ENTCERT_TOL", "0.001").output().unwrap();
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["tolerances"]["criterion"], 0.001);
}
