use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fwua(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwua"))
        .env("FWUA_OUT_DIR", dir)
        .args(args)
        .output()
        .expect("run fwua")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Trace rows without the timing column.
fn trace_without_time(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    let t = header.iter().position(|h| h == "elapsed_s").unwrap();
    r.records()
        .map(|rec| {
            rec.unwrap()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != t)
                .map(|(_, v)| v.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn generate_cov_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        ok(&fwua(dir.path(), &["generate", "cov", "--n", "20", "--blocks", "5", "--noise-var", "0.2", "--seed", "7", "--output", path_str(p)]));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["kind"], "covariance");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["provenance"]["generator"], "block_diag_cov");
}

#[test]
fn default_output_goes_to_env_dir() {
    let dir = TempDir::new().unwrap();
    let out = fwua(dir.path(), &["generate", "sbm", "--nodes", "30", "--communities", "2", "--seed", "1"]);
    ok(&out);
    let path = dir.path().join("sbm-n30-seed1.json");
    let v: serde_json::Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    assert_eq!(v["kind"], "link_prediction");
}

#[test]
fn solve_writes_trace_and_metrics() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("sbm.json");
    ok(&fwua(dir.path(), &["generate", "sbm", "--nodes", "30", "--seed", "2", "--output", path_str(&inst)]));
    let run = dir.path().join("run");
    ok(&fwua(&run, &["solve", "--instance", path_str(&inst), "--max-iters", "25"]));

    let text = fs::read_to_string(run.join("trace.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,objective,surrogate,fw_gap,tau,step_inf_norm,elapsed_s,rank_estimate"
    );
    assert_eq!(lines.count(), 25);

    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("metrics.json")).unwrap()).unwrap();
    let auc = m["metrics"]["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    assert!(m["metrics"]["rmse"].is_null());
    assert_eq!(m["config"]["max_iters"], 25);
    assert_eq!(m["config"]["variant"]["name"], "fwua");
    assert!(m["config"]["delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn sccg_with_zero_mu_is_subgradient() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("cov.json");
    ok(&fwua(dir.path(), &["generate", "cov", "--n", "15", "--blocks", "3", "--seed", "3", "--output", path_str(&inst)]));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&fwua(&a, &["solve", "--instance", path_str(&inst), "--variant", "sccg", "--mu", "0", "--max-iters", "30"]));
    ok(&fwua(&b, &["solve", "--instance", path_str(&inst), "--variant", "subgrad", "--max-iters", "30"]));
    assert_eq!(trace_without_time(&a.join("trace.csv")), trace_without_time(&b.join("trace.csv")));
}

#[test]
fn compare_traces_are_aligned_and_repeatable() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("cov.json");
    ok(&fwua(dir.path(), &["generate", "cov", "--n", "15", "--blocks", "3", "--seed", "4", "--output", path_str(&inst)]));
    let args = ["compare", "--instance", path_str(&inst), "--variants", "fwua,subgrad,sccg,hcgs", "--mu", "0.01,0.001", "--max-iters", "20"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&fwua(&a, &args));
    ok(&fwua(&b, &args));
    let rows = trace_without_time(&a.join("compare.csv"));
    assert_eq!(rows.len(), 5 * 20);
    let variants: std::collections::BTreeSet<_> = rows.iter().map(|r| r[0].clone()).collect();
    assert_eq!(variants.len(), 5);
    assert_eq!(rows, trace_without_time(&b.join("compare.csv")));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = fwua(dir.path(), &["solve", "--instance", "/nonexistent/instance.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(fwua(dir.path(), &["solve", "--instance", path_str(&bad)]).status.code(), Some(3));

    let inst = dir.path().join("cov.json");
    ok(&fwua(dir.path(), &["generate", "cov", "--n", "10", "--blocks", "2", "--output", path_str(&inst)]));
    let neg_mu = fwua(dir.path(), &["solve", "--instance", path_str(&inst), "--variant", "sccg", "--mu=-1"]);
    assert_eq!(neg_mu.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&neg_mu.stderr).contains("mu"));
    let zero_iters = fwua(dir.path(), &["solve", "--instance", path_str(&inst), "--max-iters", "0"]);
    assert_eq!(zero_iters.status.code(), Some(2));

    let edges = dir.path().join("edges.txt");
    fs::write(&edges, "0 1\n1 two\n").unwrap();
    let out = fwua(dir.path(), &["generate", "link", "--edges", path_str(&edges)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(fwua(dir.path(), &["generate", "cov", "--n", "3", "--blocks", "5"]).status.code(), Some(2));
}

#[test]
fn ratings_round_trip() {
    let dir = TempDir::new().unwrap();
    let ratings = dir.path().join("ratings.dat");
    let mut text = String::new();
    for u in 1..=8 {
        for i in 1..=6 {
            if (u + i) % 3 != 0 {
                text.push_str(&format!("{u}::{i}::{}::0\n", (u * i) % 5 + 1));
            }
        }
    }
    fs::write(&ratings, text).unwrap();
    let inst = dir.path().join("r.json");
    ok(&fwua(dir.path(), &["generate", "ratings", "--ratings", path_str(&ratings), "--test-frac", "0.25", "--seed", "5", "--output", path_str(&inst)]));
    let run = dir.path().join("run");
    ok(&fwua(&run, &["solve", "--instance", path_str(&inst), "--max-iters", "30"]));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("metrics.json")).unwrap()).unwrap();
    assert!(m["metrics"]["rmse"].as_f64().unwrap() >= 0.0);
    assert!(m["metrics"]["auc"].is_null());
}
