use std::process::{Command, Output};

fn rematch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rematch")).args(args).env_remove("REMATCH_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("rematch-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gen_then_simulate_roundtrips() {
    let path = tmp("sep.json");
    let o = rematch(&["gen", "separation", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let inst = rematch::Instance::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(inst, rematch::harness::gen_separation());

    let o = rematch(&["simulate", "--instance", path.to_str().unwrap(), "--policy", "sm", "--trials", "500", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let stats: rematch::harness::RewardStats = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(stats, rematch::harness::monte_carlo(&inst, rematch::PolicyId::Sm, 500, 9).unwrap());

    let o = rematch(&["simulate", "--instance", path.to_str().unwrap(), "--format", "csv", "--trials", "50"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("round,mean_successes,stderr"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn opt_reports_both_values() {
    let path = tmp("sep2.json");
    rematch(&["gen", "separation", "--out", path.to_str().unwrap()]);
    let plain: serde_json::Value =
        serde_json::from_str(stdout(&rematch(&["opt", "--instance", path.to_str().unwrap()])).trim()).unwrap();
    let commit: serde_json::Value =
        serde_json::from_str(stdout(&rematch(&["opt", "--instance", path.to_str().unwrap(), "--commit"])).trim())
            .unwrap();
    assert!((plain["value"].as_f64().unwrap() - 3.094).abs() < 1e-9);
    assert!((commit["value"].as_f64().unwrap() - 2.926).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(rematch(&["--help"]).status.code(), Some(0));
    assert_eq!(rematch(&["simulate"]).status.code(), Some(1));
    assert_eq!(rematch(&["gen", "knn", "--n", "3", "--p", "2"]).status.code(), Some(1));
    assert_eq!(rematch(&["lp", "--t", "10", "--variant", "gc", "--check-dual", "--form", "printed"]).status.code(), Some(2));
    assert_eq!(rematch(&["lp", "--t", "40", "--solve"]).status.code(), Some(3));
    let big = tmp("big.json");
    rematch(&["gen", "knn", "--n", "4", "--p", "0.5", "--out", big.to_str().unwrap()]);
    assert_eq!(rematch(&["opt", "--instance", big.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(rematch(&["--exact-limit", "31", "lp", "--t", "2"]).status.code(), Some(3));
}

#[test]
fn verify_unit_small_profile_exits_zero() {
    let o = rematch(&["verify", "--profile", "unit-small", "--count", "200", "--mode", "exact", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().all(|l| l.contains("\"verdict\":\"holds\"")));
}

#[test]
fn threads_flag_and_env_agree() {
    let a = rematch(&["--threads", "1", "reproduce", "kernels", "--seed", "3"]);
    let b = Command::new(env!("CARGO_BIN_EXE_rematch"))
        .args(["reproduce", "kernels", "--seed", "3"])
        .env("REMATCH_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
