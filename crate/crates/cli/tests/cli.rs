use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mtcache(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtcache"))
        .args(args)
        .output()
        .expect("binary runs")
}

const SMALL: &str = r#"{
  "capacity": 40,
  "policy": "maxmin_fair",
  "total_txns": 4000,
  "sample_every": 500,
  "seed": 3,
  "tenants": [
    {"workload": {"tenant_id": 1, "universe_size": 300, "phases": [{"alpha": 1.0, "start_txn": 0}]},
     "requirement": {"hard": 0.2, "soft": 0.4}},
    {"workload": {"tenant_id": 2, "universe_size": 300, "phases": [{"alpha": 0.7, "start_txn": 0}]},
     "requirement": {"hard": 0.2, "soft": 0.4}}
  ]
}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_csv_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = mtcache(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("txn,tenant_id,ewma_hit_rate,window_hit_rate,dc_slots,sc_slots,gap,hard_violation,G")
    );
    // 4000 transactions sampled every 500, two tenants per sample.
    assert_eq!(lines.count(), 16);

    let o = mtcache(&["run", "--config", &cfg, "--seed", "4"]);
    assert!(o.status.success());
    assert_ne!(String::from_utf8(o.stdout).unwrap(), text);
}

#[test]
fn exported_trace_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", SMALL);
    let trace = dir.path().join("t.trace");
    let o = mtcache(&[
        "export-trace",
        "--config",
        &cfg,
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let direct = mtcache(&["run", "--config", &cfg]);
    let replay = mtcache(&["run", "--config", &cfg, "--trace", trace.to_str().unwrap()]);
    assert!(replay.status.success());
    assert_eq!(direct.stdout, replay.stdout);
}

#[test]
fn compare_writes_one_file_per_policy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", SMALL);
    let out = dir.path().join("cmp");
    let o = mtcache(&[
        "compare",
        "--config",
        &cfg,
        "--policies",
        "global,maxmin_fair,static",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for p in ["global", "maxmin_fair", "static"] {
        assert!(out.join(format!("{p}.csv")).exists());
    }
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        &SMALL.replace("\"capacity\": 40,", ""),
    );
    let o = mtcache(&["run", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));

    let hybrid = write(
        dir.path(),
        "h.json",
        &SMALL.replace("maxmin_fair", "hybrid_fair"),
    );
    let o = mtcache(&["run", "--config", &hybrid]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("layout"));

    let cfg = write(dir.path(), "s.json", SMALL);
    let o = mtcache(&[
        "compare",
        "--config",
        &cfg,
        "--policies",
        "lru",
        "--out",
        "x",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = mtcache(&["sweep", "--config", &cfg, "--targets", "0.3:0.2:0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mtcache(&["suggest-dc", "--hard", "1.5", "--alpha", "0.7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    let o = mtcache(&["run", "--config", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_and_infeasible_target() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", SMALL);
    let out = dir.path().join("sweep.csv");
    let o = mtcache(&[
        "sweep",
        "--config",
        &cfg,
        "--targets",
        "0.3",
        "--policies",
        "global,maxmin_fair",
        "--resolution",
        "20",
        "--trials",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("target,policy,min_slots,savings_vs_global,savings_vs_static\n"));
    assert_eq!(text.lines().count(), 3);

    let o = mtcache(&[
        "sweep",
        "--config",
        &cfg,
        "--targets",
        "0.99",
        "--policies",
        "global",
        "--upper",
        "40",
        "--resolution",
        "20",
        "--trials",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = mtcache(&[
        "suggest-dc",
        "--hard",
        "0.9",
        "--alpha",
        "0.0",
        "--universe",
        "1000",
        "--txns",
        "2000",
        "--trials",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn suggest_dc_prints_a_slot_count() {
    let o = mtcache(&[
        "suggest-dc",
        "--hard",
        "0.3",
        "--alpha",
        "0.7",
        "--universe",
        "2000",
        "--txns",
        "20000",
        "--resolution",
        "10",
        "--trials",
        "1",
    ]);
    assert!(o.status.success());
    let n: usize = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!(n > 0 && n <= 2000 && n.is_multiple_of(10));
}
