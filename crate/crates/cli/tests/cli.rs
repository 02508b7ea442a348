use std::process::{Command, Output};

use serde_json::Value;

fn wits(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wits")).args(args).output().expect("binary runs")
}

fn wits_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wits")).args(args).env(key, value).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn csv_rows(text: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rd = csv::Reader::from_reader(text);
    let header = rd.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = rd.records().map(|r| r.unwrap().iter().map(str::to_owned).collect()).collect();
    (header, rows)
}

#[test]
fn eval_linear_at_zero_power() {
    let v = json(&wits(&["eval", "linear", "--Q", "1", "--N", "0.15", "--P", "0"]));
    assert_eq!(v["P"], serde_json::json!(0.0));
    assert_eq!(v["S"], serde_json::json!(0.130435));
    assert_eq!(v["manifest"]["command"], "eval linear");
    assert_eq!(v["manifest"]["parameters"]["N"], "0.15");
    assert!(v["manifest"]["timestamp"].as_str().unwrap().ends_with('Z'));
}

#[test]
fn opt_zec2_checkpoint() {
    let v = json(&wits(&["opt", "zec", "--k", "2", "--Q", "1", "--N", "0.15"]));
    let p = v["P_star"].as_f64().unwrap();
    assert!((0.37..=0.39).contains(&p), "{p}");
    assert!(v["gap"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn zecf_is_idle_below_threshold() {
    let v = json(&wits(&["opt", "zecf", "--N", "0.06", "--no-manifest"]));
    assert_eq!(v["P_star"], serde_json::json!(0.0));
    assert!(v.get("manifest").is_none());
}

#[test]
fn lindpc_root_and_sweep() {
    let v = json(&wits(&["opt", "lindpc-root", "--N", "0.15", "--no-manifest"]));
    assert_eq!(v["P_star"], serde_json::json!(0.132456));
    let o = wits(&["sweep", "lindpc-root", "--N-from", "0.1", "--N-to", "0.2", "--steps", "3", "--no-manifest"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(header, ["scheme", "Q", "N", "P_star"]);
    assert_eq!(rows.iter().map(|r| r[2].as_str()).collect::<Vec<_>>(), ["0.100000", "0.150000", "0.200000"]);
    assert_eq!(rows[1][3], "0.132456");
}

#[test]
fn table_shape() {
    let o = wits(&["table", "zec-par", "--Q", "1", "--grid", "3", "--starts", "1", "--no-manifest"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(header.len(), 16);
    assert_eq!(header[0], "N");
    assert_eq!(rows.len(), 8);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 16);
        assert_eq!(r[0], format!("{:.6}", 0.1 * (i + 1) as f64));
        // Fixed six-decimal formatting everywhere.
        assert!(r[1..].iter().all(|c| c.split_once('.').map(|(_, d)| d.len()) == Some(6)), "{r:?}");
    }
}

#[test]
fn curves() {
    let o = wits(&["curve", "sg", "--N", "0.15", "--steps", "5", "--no-manifest"]);
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(header, ["P", "S"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][1], "0.130435");
    let o = wits(&["curve", "kpoint", "--k", "2", "--N", "0.15", "--omega-steps", "3", "--grid", "5", "--no-manifest"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(header, ["omega", "P", "S", "levels_1", "boundaries_1"]);
    // ω = 1 weighs power only: the minimum two-point power.
    assert_eq!(rows[2][1], "0.363380");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["eval", "linear", "--N", "0.15", "--P", "0", "--bogus"][..],
        &["eval", "linear", "--N", "-1", "--P", "0"],
        &["eval", "linear", "--N", "0", "--P", "0"],
        &["eval", "linear", "--P", "0"],
        &["frobnicate"],
        &["eval", "kpoint", "--N", "0.15", "--k", "3", "--levels", "0.5,1", "--boundaries", "0,1"],
    ] {
        let o = wits(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn infeasible_exit_3() {
    let o = wits(&["opt", "zec", "--k", "2", "--N", "50", "--grid", "3", "--starts", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no feasible point"));
}

#[test]
fn help_exits_0() {
    let o = wits(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("table"));
}

#[test]
fn reproducible_without_manifest() {
    let args = ["opt", "zecf", "--N", "0.2", "--grid", "5", "--seed", "3", "--no-manifest"];
    assert_eq!(wits(&args).stdout, wits(&args).stdout);
    let args =
        ["mc", "verify", "--suite", "entropy", "--configs", "3", "--samples", "5000", "--seed", "2", "--no-manifest"];
    let a = wits(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, wits(&args).stdout);
}

#[test]
fn worker_count_does_not_change_output() {
    let args = ["mc", "verify", "--suite", "strategies", "--configs", "3", "--samples", "20000", "--no-manifest"];
    let one = wits_env(&args, "WITS_THREADS", "1");
    let three = wits_env(&args, "WITS_THREADS", "3");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    let args = ["opt", "zec", "--k", "3", "--N", "0.3", "--grid", "5", "--no-manifest"];
    assert_eq!(wits_env(&args, "WITS_THREADS", "1").stdout, wits_env(&args, "WITS_THREADS", "4").stdout);
    assert_eq!(wits_env(&args, "WITS_THREADS", "0").status.code(), Some(2));
}

#[test]
fn mc_verify_csv() {
    let o = wits(&["mc", "verify", "--suite", "zec", "--configs", "4", "--samples", "20000", "--no-manifest"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(header, ["suite", "case", "quantity", "closed_form", "mc_mean", "mc_std_error", "z", "pass"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[0] == "zec" && r[7] == "true"));
}

#[test]
fn out_writes_payload_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let o = wits(&["curve", "lindpc", "--N", "0.15", "--steps", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let (header, rows) = csv_rows(&std::fs::read(&path).unwrap());
    assert_eq!((header.len(), rows.len()), (2, 4));
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("curve.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "curve lindpc");
    assert_eq!(manifest["parameters"]["steps"], "4");

    let path = dir.path().join("eval.json");
    let o = wits(&["eval", "twopoint", "--N", "0.15", "--a", "0.8", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert!(v["manifest"].is_object());
    assert_eq!(v["scheme"], "two-point");
}

#[test]
fn csv_on_stdout_sends_manifest_to_stderr() {
    let o = wits(&["eval", "sg", "--N", "0.15", "--P", "0.35", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(header[..2], ["P", "S"]);
    // N(Q−N−P)/Q on the time-sharing segment.
    assert_eq!(rows[0][1], "0.075000");
    let m: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(m["command"], "eval sg");
}
