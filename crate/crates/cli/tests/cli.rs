use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn rus(args: &[&str], env_db: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rus"));
    cmd.args(args).env_remove("RUS_DB");
    if let Some(p) = env_db {
        cmd.env("RUS_DB", p);
    }
    cmd.output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn searched(dir: &Path) -> PathBuf {
    let out = dir.join("db.jsonl");
    let o = rus(&["search", "--template", "two-cz", "--t-budget", "4", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn search_writes_a_versioned_database() {
    let dir = tempfile::tempdir().unwrap();
    let db = searched(dir.path());
    let text = std::fs::read_to_string(&db).unwrap();
    let header: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["schema_version"], 1);
    assert_eq!(header["template"]["kind"], "two_cz_canonical");
    assert!(header.get("shards").is_none());
    assert_eq!(text.lines().count(), 1 + header["base_count"].as_u64().unwrap() as usize);
}

#[test]
fn every_json_reply_carries_the_schema_version() {
    let dir = tempfile::tempdir().unwrap();
    let db = searched(dir.path());
    let d = db.to_str().unwrap();
    let circ = dir.path().join("c.txt");
    std::fs::write(&circ, "{\"width\":2,\"ancillas\":[0]}\nH0 CZ0,1 T0 H0 CZ0,1 T0 H0 MZ0\n").unwrap();
    let expanded = dir.path().join("x.jsonl");
    let x = expanded.to_str().unwrap();
    let zpath = dir.path().join("z.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["db", "stats", "--db", d],
        vec!["db", "expand", "--db", d, "--t-cap", "8", "--out", x],
        vec!["db", "export-z", "--db", x, "--out", zpath.to_str().unwrap()],
        vec!["decompose", "z", "--db", x, "--angle", "-0.4", "--eps", "0.05"],
        vec!["verify", "--db", d, "--amplify"],
        vec!["cost", "bgs", "--eps", "1e-6"],
        vec!["cost", "v-ratio", "--p", "13", "--tp", "7.38"],
        vec!["cost", "wk", "--theta", "0.01", "--eps", "1e-6"],
        vec!["cost", "chebyshev", "--variance", "3.84"],
        vec!["analyze", circ.to_str().unwrap()],
    ];
    for args in runs {
        let o = rus(&args, None);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(json(&o)["schema_version"], 1, "{args:?}");
    }
}

#[test]
fn analyze_reports_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let circ = dir.path().join("v3.txt");
    std::fs::write(&circ, "{\"width\":2,\"ancillas\":[0]}\nH0 S0 T0 H0 CZ0,1 T0 H0 CZ0,1 T0 H0 T0 H0 MZ0\n").unwrap();
    let v = json(&rus(&["analyze", circ.to_str().unwrap()], None));
    assert_eq!(v["p"], 0.625);
    assert_eq!(v["expected_t"], 6.4);
    assert_eq!(v["t_count"], 4);
}

#[test]
fn database_path_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let db = searched(dir.path());
    let o = rus(&["db", "stats"], Some(&db));
    assert!(o.status.success());
    assert_eq!(json(&o)["base"], 5);
    let o = rus(&["db", "stats"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let db = searched(dir.path());
    let d = db.to_str().unwrap();
    assert_eq!(rus(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(rus(&["cost", "bgs"], None).status.code(), Some(2));
    assert_eq!(rus(&["--help"], None).status.code(), Some(0));
    // unreachable accuracy is a domain error
    let o = rus(&["decompose", "z", "--db", d, "--angle", "0.3", "--eps", "1e-9"], None);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["schema_version"], 1);
    assert!(err["error"].as_str().unwrap().contains("t-cap"));
    assert_eq!(rus(&["cost", "chebyshev", "--variance", "1", "--confidence", "1.5"], None).status.code(), Some(1));
    assert_eq!(rus(&["analyze", "/nonexistent"], None).status.code(), Some(1));
    let big = rus(&["search", "--template", "two-cz", "--t-budget", "20", "--out", "/dev/null"], None);
    assert_eq!(big.status.code(), Some(1));
}

#[test]
fn shard_files_dedupe_into_the_full_search() {
    let dir = tempfile::tempdir().unwrap();
    let full = searched(dir.path());
    let mut parts = vec![];
    for i in 0..3 {
        let p = dir.path().join(format!("s{i}.jsonl"));
        let o = rus(
            &["search", "--template", "two-cz", "--t-budget", "4", "--shards", "3", "--shard-index", &i.to_string(), "--out", p.to_str().unwrap()],
            None,
        );
        assert!(o.status.success());
        parts.push(p);
    }
    let merged = dir.path().join("merged.jsonl");
    let mut args = vec!["db", "dedupe", "--out", merged.to_str().unwrap()];
    let names: Vec<String> = parts.iter().map(|p| p.to_str().unwrap().to_string()).collect();
    args.extend(names.iter().map(|s| s.as_str()));
    assert!(rus(&args, None).status.success());
    assert_eq!(std::fs::read(&merged).unwrap(), std::fs::read(&full).unwrap());
}

#[test]
fn human_output_is_plain_text() {
    let o = rus(&["--human", "cost", "v-ratio", "--p", "13", "--tp", "7.38"], None);
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("ratio: 1.13"));
    assert!(serde_json::from_str::<Value>(&s).is_err());
}

#[test]
fn export_z_csv() {
    let dir = tempfile::tempdir().unwrap();
    let db = searched(dir.path());
    let o = rus(&["db", "export-z", "--db", db.to_str().unwrap(), "--csv"], None);
    let s = String::from_utf8(o.stdout).unwrap();
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("angle,expected_t,variance_t,entry"));
    assert!(lines.next().unwrap().starts_with("0.0"));
}
