use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn bcore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcore"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn total_allocation(state: &Value) -> i64 {
    state["aspirations"]
        .as_object()
        .unwrap()
        .values()
        .flat_map(|v| v.as_array().unwrap().iter().map(|x| x.as_i64().unwrap()))
        .sum()
}

fn temp_file(dir: &tempfile::TempDir, name: &str, contents: &[u8]) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn solve_tiny1() {
    let out = bcore(&["solve", &data("tiny1.json")]);
    assert_eq!(out.status.code(), Some(0));
    let state = json(&out);
    assert_eq!(state["matching"].as_array().unwrap().len(), 1);
    assert_eq!(total_allocation(&state), 4);
}

#[test]
fn solve_min_delta_tiny3_with_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    let out = bcore(&[
        "solve",
        &data("tiny3.json"),
        "--mode",
        "min-delta",
        "--class",
        "u",
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(total_allocation(&json(&out)), 7);
    let log = std::fs::read_to_string(log).unwrap();
    assert!(log.starts_with("iter,case,f_plus,total_v_aspiration,total_u_aspiration\n"));
}

#[test]
fn corrupt_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = temp_file(&dir, "bad.json", b"{not json");
    let out = bcore(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
    assert_eq!(
        bcore(&["solve", "/nonexistent/instance.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bcore(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn clamping_warns_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let inst = temp_file(
        &dir,
        "clamp.json",
        br#"{"epsilon": "1", "u_nodes": ["u1"], "v_nodes": ["v1"], "b_values": {"u1": 3, "v1": 1}, "weights": [["2"]]}"#,
    );
    let out = bcore(&["oracle", inst.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(json(&out)["value"], 2);
}

#[test]
fn simulate_tiny1_converges() {
    let out = bcore(&[
        "simulate",
        &data("tiny1.json"),
        "--seed",
        "1",
        "--horizon",
        "1000",
        "--check-period",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["converged"], true);
    assert_eq!(summary["total_feasible_aspiration"], 4);
}

#[test]
fn simulate_horizon_zero() {
    let out = bcore(&["simulate", &data("tiny3.json"), "--horizon", "0"]);
    let summary = json(&out);
    assert_eq!(summary["iterations"], 0);
    assert_eq!(summary["matched_edges"], 0);
    assert_eq!(summary["converged"], false);
}

#[test]
fn simulate_writes_trace_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("run.csv");
    let out = bcore(&[
        "simulate",
        &data("tiny2.json"),
        "--seed",
        "3",
        "--horizon",
        "50",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("iter,proposer,receiver,outcome,total_feasible_aspiration,matched_edges,f_plus_size")
    );
    assert_eq!(lines.count(), 50);
    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["horizon"], 50);
    assert_eq!(meta["epsilon"], "1");
    assert_eq!(meta["instance_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_from_explicit_state() {
    let dir = tempfile::tempdir().unwrap();
    let bad = temp_file(
        &dir,
        "neg.json",
        br#"{"aspirations": {"u1": [-1], "v1": [0]}, "matching": []}"#,
    );
    let out = bcore(&[
        "simulate",
        &data("tiny1.json"),
        "--init-state",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let good = temp_file(
        &dir,
        "ok.json",
        br#"{"aspirations": {"u1": [3], "v1": [2]}, "matching": []}"#,
    );
    let out = bcore(&[
        "simulate",
        &data("tiny1.json"),
        "--init-state",
        good.to_str().unwrap(),
        "--horizon",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn certify_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let core = temp_file(
        &dir,
        "core.json",
        br#"{"aspirations": {"u1": [2], "u2": [3], "v1": [1], "v2": [1]}, "matching": [[["u1", 1], ["v1", 1]], [["u2", 1], ["v2", 1]]]}"#,
    );
    let out = bcore(&[
        "certify",
        &data("tiny3.json"),
        core.to_str().unwrap(),
        "--nodes-core",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["nodes_core"]["pass"], true);

    let zero = temp_file(
        &dir,
        "zero.json",
        br#"{"aspirations": {"u1": [0], "v1": [0]}, "matching": []}"#,
    );
    let out = bcore(&["certify", &data("tiny1.json"), zero.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["copies_core"]["pairwise_stability"]["pass"], false);
    assert_eq!(
        report["copies_core"]["pairwise_stability"]["violations"][0]["weight"],
        4
    );

    let garbage = temp_file(&dir, "garbage.json", b"[]");
    assert_eq!(
        bcore(&["certify", &data("tiny1.json"), garbage.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn certify_nodes_core_too_large() {
    let dir = tempfile::tempdir().unwrap();
    let gen = bcore(&["generate", "10", "5", "--seed", "1"]);
    let inst = temp_file(&dir, "big.json", &gen.stdout);
    let state = temp_file(
        &dir,
        "state.json",
        &bcore(&["solve", inst.to_str().unwrap()]).stdout,
    );
    let out = bcore(&[
        "certify",
        inst.to_str().unwrap(),
        state.to_str().unwrap(),
        "--nodes-core",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too large"));
    let out = bcore(&["certify", inst.to_str().unwrap(), state.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn oracle_values() {
    let out = bcore(&["oracle", &data("tiny2.json")]);
    assert_eq!(json(&out)["value"], 10);
    let out = bcore(&["oracle", &data("tiny3.json"), "--coalition", "u1,v2"]);
    assert_eq!(json(&out)["value"], 1);
    assert_eq!(
        bcore(&["oracle", &data("tiny3.json"), "--coalition", "u9"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn generate_is_valid_and_deterministic() {
    let a = bcore(&["generate", "10", "5", "--seed", "7"]);
    let b = bcore(&["generate", "10", "5", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let inst = bcore::instance::load_instance(a.stdout.as_slice())
        .unwrap()
        .instance;
    assert_eq!((inst.num_u(), inst.num_v()), (10, 5));
}

#[test]
fn sweep_outputs_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = temp_file(
        &dir,
        "spec.json",
        br#"{"kind": "node-removal", "num_instances": 2, "num_seeds_per_instance": 1, "horizon": 1000,
             "instances": {"family": "uniform", "config": {"num_u": 4, "num_v": 4, "weight_max": 8}},
             "removals": [0, 2]}"#,
    );
    let conv = dir.path().join("conv.csv");
    let out = bcore(&[
        "sweep",
        spec.to_str().unwrap(),
        "--convergence",
        conv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("sweep_point,iter_bucket,mean_relative_feasible,frac_at_opt,n_runs\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 11);
    let seq = bcore(&["sweep", spec.to_str().unwrap(), "--sequential"]);
    assert_eq!(seq.stdout, csv.as_bytes());
    assert!(std::fs::read_to_string(conv)
        .unwrap()
        .starts_with("sweep_point,median_iterations_to_core"));

    let bad = temp_file(
        &dir,
        "bad.json",
        br#"{"kind": "mystery", "num_instances": 1, "num_seeds_per_instance": 1, "horizon": 1}"#,
    );
    assert_eq!(
        bcore(&["sweep", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
}
