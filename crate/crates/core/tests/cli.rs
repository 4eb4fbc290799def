use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use hetnet_meta::analytics;
use hetnet_meta::cli::{self, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK};
use hetnet_meta::NetworkConfig;
use tempfile::TempDir;

const FIG1: &str = r#"
alpha = 4.0

[[tiers]]
density = 1.0
power = 1.0
bias = 1.0

[[tiers]]
density = 5.0
power = 0.2
bias = 10.0
"#;

const FIG9_JSON: &str = r#"{
  "alpha": 4.0,
  "tiers": [
    {"density": 1.0, "power": 1.0, "bias": 1.0},
    {"density": 25.0, "power": 0.005, "bias": 10.0}
  ]
}"#;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Out {
    let mut o = Vec::new();
    let mut e = Vec::new();
    let mut full = vec!["hetnet-meta"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut o, &mut e);
    Out {
        code,
        stdout: String::from_utf8(o).unwrap(),
        stderr: String::from_utf8(e).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows of a CSV document: header line first, comments dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn moments_table_matches_library() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let out = run(&["moments", s(&cfg), "--theta", "0.5,2", "-b", "1,2,0+3j"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.starts_with("# hetnet-meta "));
    assert!(out.stdout.contains("# config: {\"alpha\":4.0"));
    let r = rows(&out.stdout);
    assert_eq!(r[0], ["theta", "scope", "b", "moment_real", "moment_imag", "status"]);
    assert_eq!(r.len(), 1 + 2 * 3 * 3);
    let net = NetworkConfig::two_tier(4.0, 5.0, 0.2, 10.0).unwrap();
    for row in &r[1..] {
        assert_eq!(row[5], "ok");
        let theta: f64 = row[0].parse().unwrap();
        let scope = row[1].parse().unwrap();
        let b = if row[2] == "0+3j" { hetnet_meta::Complex64::new(0.0, 3.0) } else { row[2].parse::<f64>().unwrap().into() };
        let want = analytics::moment(&net, scope, theta, b).unwrap().value;
        assert_eq!(row[3].parse::<f64>().unwrap(), want.re);
        assert_eq!(row[4].parse::<f64>().unwrap(), want.im);
    }
}

#[test]
fn moments_statuses_and_delay() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig9.json", FIG9_JSON);
    let out = run(&["moments", s(&cfg), "--theta", "0.2,1", "-b", "-1", "--scope", "tier2"]);
    assert_eq!(out.code, EXIT_OK);
    let r = rows(&out.stdout);
    assert_eq!(r[1][5], "ok");
    assert_eq!(r[2][5], "infinite");
    assert_eq!(r[2][3], "inf");

    let aloha = write(&dir, "aloha.toml", &FIG1.replace("alpha = 4.0\n", "alpha = 4.0\nactivity = [1.0, 1.0]\n"));
    let out = run(&["moments", s(&aloha), "--theta", "10", "-b", "-1.5"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("# model: aloha"));
    assert!(rows(&out.stdout)[1..].iter().all(|r| r[5] == "numerical-failure"));
}

#[test]
fn thresholds_in_db() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let lin = run(&["moments", s(&cfg), "--theta", "1,10", "--scope", "overall"]);
    let db = run(&["--db", "moments", s(&cfg), "--theta", "0,10", "--scope", "overall"]);
    let (rl, rd) = (rows(&lin.stdout), rows(&db.stdout));
    assert_eq!(rd[0][0], "theta_db");
    for k in 1..3 {
        assert_eq!(rl[k][3], rd[k][3]);
    }
    let neg = run(&["--db", "moments", s(&cfg), "--theta=-10:10:5"]);
    assert_eq!(neg.code, EXIT_OK, "{}", neg.stderr);
    assert_eq!(rows(&neg.stdout).len(), 1 + 5 * 3);
}

#[test]
fn json_output_parses() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let out = run(&["--json", "gains", s(&cfg), "-b", "1,2"]);
    assert_eq!(out.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["tool"], "hetnet-meta");
    assert_eq!(v["columns"][3], "g0_db");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let g0_db = rows[0][3].as_f64().unwrap();
    assert!((g0_db - 6.7467).abs() < 5e-4);
    assert_eq!(v["configs"][0]["tiers"][1]["bias"], 10.0);
}

#[test]
fn gains_overlay_and_variance_shift() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let out = run(&["--db", "gains", s(&cfg), "-b", "1", "--overlay=-20:20:9"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let r = rows(&out.stdout);
    assert_eq!(r[0][2], "theta_db");
    // one row per tier, threshold and regime
    assert_eq!(r.len(), 1 + 2 * 9 * 2);
    let out = run(&["gains", s(&cfg), "--variance-shift=-30,0,30"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(rows(&out.stdout).len(), 1 + 2 * 3);
    let clash = run(&["gains", s(&cfg), "--overlay", "1", "--variance-shift", "1"]);
    assert_eq!(clash.code, EXIT_CONFIG);
}

#[test]
fn meta_curves() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let out = run(&["meta", s(&cfg), "--theta", "1", "--t", "0.1:0.9:5", "--scope", "overall"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let r = rows(&out.stdout);
    assert_eq!(r.len(), 6);
    for row in &r[1..] {
        let exact: f64 = row[2].parse().unwrap();
        let beta: f64 = row[3].parse().unwrap();
        assert!((exact - beta).abs() < 0.03);
        assert_eq!(row[5], "NaN");
    }
    let emp = run(&["meta", s(&cfg), "--theta", "1", "--t", "0.5", "--method", "empirical", "--realizations", "400", "--window", "6"]);
    assert_eq!(emp.code, EXIT_OK, "{}", emp.stderr);
    assert!(rows(&emp.stdout)[1..].iter().all(|r| r[5] != "NaN"));
    let aloha = write(&dir, "a.toml", &FIG1.replace("alpha = 4.0\n", "alpha = 4.0\nactivity = [0.5, 0.5]\n"));
    assert_eq!(run(&["meta", s(&aloha), "--theta", "1"]).code, EXIT_CONFIG);
}

#[test]
fn delay_region_markers() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig9.json", FIG9_JSON);
    let out = run(&["--db", "delay-region", s(&cfg), "--theta=-10,0", "--resolution", "20"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let r = rows(&out.stdout);
    assert_eq!(r[0], ["theta_db", "region", "kind", "marker", "p1", "p2"]);
    let at = |db: &str| r[1..].iter().filter(|x| x[0] == db).cloned().collect::<Vec<_>>();
    // every region is the full cube at -10 dB
    let low = at("-10");
    assert_eq!(low.len(), 5);
    assert!(low.iter().all(|x| x[3] == "full-cube"));
    // at 0 dB tier 1 is still full, tier 2 and the intersection are not
    let mid = at("0");
    assert!(mid.iter().any(|x| x[1] == "S1" && x[3] == "full-cube"));
    assert!(mid.iter().any(|x| x[1] == "S2" && x[3] == "boundary"));
    assert!(mid.iter().any(|x| x[1] == "S" && x[3] == "boundary"));
}

#[test]
fn equal_biases_give_identical_boundaries() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "eq.json", &FIG9_JSON.replace("\"bias\": 10.0", "\"bias\": 1.0"));
    let out = run(&["delay-region", s(&cfg), "--theta", "2", "--resolution", "30"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let r = rows(&out.stdout);
    let pts = |region: &str| -> Vec<(String, String)> {
        r[1..]
            .iter()
            .filter(|x| x[1] == region && x[2] == "exact")
            .map(|x| (x[4].clone(), x[5].clone()))
            .collect()
    };
    assert!(!pts("S1").is_empty());
    assert_eq!(pts("S1"), pts("S2"));
}

#[test]
fn simulate_with_compare_and_raw() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let raw = dir.path().join("raw.csv");
    let out = run(&[
        "simulate", s(&cfg), "--theta", "1", "-b", "1", "--t", "0.5", "--compare", "--raw", s(&raw), "--realizations", "300",
        "--window", "8", "--seed", "4",
    ]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.contains("# window_radius: 8"));
    assert!(out.stdout.contains("# realizations: 300"));
    let r = rows(&out.stdout);
    assert!(r.iter().any(|x| x[2] == "access" && x[5] != "NaN"));
    assert!(r.iter().any(|x| x[2] == "M1" && x[1] == "overall"));
    let dump = fs::read_to_string(&raw).unwrap();
    assert_eq!(dump.lines().count(), 301);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let args = ["simulate", s(&cfg), "--theta", "0.5,2", "--realizations", "500", "--window", "6"];
    let a = run(&[&["--threads", "1"], &args[..]].concat());
    let b = run(&[&["--threads", "2"], &args[..]].concat());
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    let m = ["moments", s(&cfg), "--theta", "0.1:10:7", "-b", "1,2"];
    assert_eq!(run(&m).stdout, run(&m).stdout);
}

#[test]
fn output_file_option() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let dest = dir.path().join("out.csv");
    let out = run(&["-o", s(&dest), "moments", s(&cfg), "--theta", "1"]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(&dest).unwrap().contains("moment_real"));
    let bad_dest = dir.path().join("missing").join("out.csv");
    assert_eq!(run(&["-o", s(&bad_dest), "moments", s(&cfg), "--theta", "1"]).code, EXIT_IO);
}

#[test]
fn figure_presets() {
    let out = run(&["figure", "--id", "m1-vs-theta", "--points", "5"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(out.stdout.matches("# config:").count(), 3);
    for id in ["var-vs-theta", "gain-shift-moments", "gain-shift-variance", "m1-vs-b2", "var-vs-b2", "asympt-v2"] {
        let out = run(&["figure", "--id", id, "--points", "5"]);
        assert_eq!(out.code, EXIT_OK, "{id}: {}", out.stderr);
        assert!(rows(&out.stdout).len() > 1);
    }
    let out = run(&["figure", "--id", "delay-region", "--points", "4"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.toml");
    let out = run(&["moments", s(&missing), "--theta", "1"]);
    assert_eq!(out.code, EXIT_IO);
    assert!(out.stderr.contains("nope.toml"));

    let bad = write(&dir, "bad.toml", &FIG1.replace("density = 5.0", "density = -5.0"));
    assert_eq!(run(&["moments", s(&bad), "--theta", "1"]).code, EXIT_CONFIG);
    let unknown = write(&dir, "unknown.toml", &format!("{FIG1}\n[extra]\nx = 1\n"));
    assert_eq!(run(&["moments", s(&unknown), "--theta", "1"]).code, EXIT_CONFIG);
    let good = write(&dir, "fig1.toml", FIG1);
    assert_eq!(run(&["moments", s(&good), "--theta", "-1"]).code, EXIT_CONFIG);
    assert_eq!(run(&["moments", s(&good), "--theta", "abc"]).code, EXIT_CONFIG);
    assert_eq!(run(&["nonsense"]).code, EXIT_CONFIG);
    assert_eq!(run(&["--threads", "0", "moments", s(&good), "--theta", "1"]).code, EXIT_CONFIG);

    let aloha = write(&dir, "a.toml", &FIG1.replace("alpha = 4.0\n", "alpha = 4.0\nactivity = [1.0, 1.0]\n"));
    let out = run(&["simulate", s(&aloha), "--theta", "10", "-b=-1.5", "--compare", "--realizations", "50", "--window", "4"]);
    assert_eq!(out.code, EXIT_NUMERICAL, "{}", out.stderr);
    assert!(out.stderr.contains("did not converge"));

    assert_eq!(run(&["--help"]).code, EXIT_OK);
}

#[test]
fn binary_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "fig1.toml", FIG1);
    let bin = env!("CARGO_BIN_EXE_hetnet-meta");
    let ok = Command::new(bin).args(["moments", s(&cfg), "--theta", "1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("moment_real"));
    let missing = Command::new(bin).args(["moments", "/nonexistent/x.toml", "--theta", "1"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(EXIT_IO));
}
