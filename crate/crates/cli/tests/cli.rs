use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn antnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

const SHORT: &str = r#"{
  "topology": "nsfnet",
  "algorithm": "antnet",
  "traffic": { "temporal": "P", "spatial": "U", "stream": "GVBR", "msia_s": 2.0, "mpia_s": 0.01 },
  "run_length_s": 20,
  "warmup_s": 10,
  "trials": 1
}"#;

#[test]
fn run_writes_summaries_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = dir.path().join("out");
    let o = antnet(&["run", &cfg, "--out", out.to_str().unwrap(), "--trials", "2", "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trial_0.json", "trial_1.json", "aggregate.json", "series.csv", "series_trial_1.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let t1: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("trial_1.json")).unwrap()).unwrap();
    assert_eq!(t1["seed"], 10);
    let agg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("aggregate.json")).unwrap()).unwrap();
    assert_eq!(agg["trials"], 2);
    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("time_s,throughput_bps,mean_delay_s"));
    assert_eq!(csv.lines().count(), 1 + 4);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(antnet(&["run", &cfg, "--out", d.to_str().unwrap()]).status.success());
    }
    for f in ["trial_0.json", "aggregate.json", "series.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"trials": 0}"#, "trials"),
        (r#"{"traffic": {"mpia_s": -1}}"#, "traffic.mpia_s"),
        (r#"{"antnet": {"launch_interval_s": 0}}"#, "antnet.launch_interval_s"),
        (r#"{"speed": 3}"#, "speed"),
        (r#"{"topology": "arpanet"}"#, "topology"),
    ];
    for (json, key) in cases {
        let cfg = write_config(dir.path(), json);
        let o = antnet(&["run", &cfg, "--out", dir.path().join("x").to_str().unwrap()]);
        assert!(!o.status.success(), "{json} was accepted");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "{json}: {err}");
    }
    let o = antnet(&["run", "/nonexistent/config.json"]);
    assert!(!o.status.success());
}

#[test]
fn sweep_rate_emits_one_row_per_interval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = dir.path().join("sweep");
    let o = antnet(&["sweep-rate", &cfg, "--rates", "0.1,1.0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    let overhead: Vec<f64> = rows.iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(overhead[0] > overhead[1]);
    assert!(out.join("sweep.json").exists());

    let single = antnet(&["sweep-rate", &cfg, "--rates", "0.3", "--out", out.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&single.stdout);
    let power: f64 = stdout.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(power, 1.0);
}

#[test]
fn topo_stats_for_builtins_and_files() {
    let o = antnet(&["topo-stats", "simplenet"]);
    assert!(o.status.success());
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("nodes 8") && s.contains("mean hops 1.929"), "{s}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.json");
    fs::write(
        &path,
        r#"{"name": "line", "nodes": 3, "links": [
            {"a": 1, "b": 2, "bandwidth_bps": 1e6, "prop_delay_s": 0.001},
            {"a": 2, "b": 3, "bandwidth_bps": 1e6, "prop_delay_s": 0.001}]}"#,
    )
    .unwrap();
    let o = antnet(&["topo-stats", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Ordered pairs: four at distance 1, two at distance 2.
    assert!(String::from_utf8_lossy(&o.stdout).contains("mean hops 1.333"));

    let o = antnet(&["topo-stats", "nowhere"]);
    assert!(!o.status.success());
}

#[test]
fn sweep_load_emits_one_row_per_load() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = dir.path().join("load");
    let o = antnet(&["sweep-load", &cfg, "--msia", "4.0,1.0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let thr: Vec<f64> = stdout
        .lines()
        .skip(1)
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(thr.len(), 2);
    assert!(thr[1] > thr[0], "heavier load should deliver more: {thr:?}");
    assert!(out.join("load_sweep.json").exists());
}

#[test]
fn algorithm_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SHORT);
    let out = dir.path().join("daemon");
    let o = antnet(&["run", &cfg, "--algorithm", "daemon", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let agg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("aggregate.json")).unwrap()).unwrap();
    assert_eq!(agg["algorithm"], "daemon");
    assert_eq!(agg["overhead"]["mean"], 0.0);

    let o = antnet(&["run", &cfg, "--algorithm", "rip"]);
    assert!(!o.status.success());
}
