//! End-to-end runs of the `kdv5` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kdv5-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn kdv5(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdv5"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

const SMALL: &str = r#"
seed = 4

[grid]
modes = 16

[initial]
kind = "random"
s = 1.0
radius = 0.5
max_mode = 4
decay = 3.0

[solver]
scheme = "etdrk4"
dt = 1e-5
t_end = 1e-3
"#;

#[test]
fn simulate_cos_conserves_the_mean() {
    let out = scratch("cos");
    let cfg = workspace().join("configs/cos.toml");
    let o = kdv5(&["simulate", "--config", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let drift = column(&out.join("conservation.csv"), "driftM");
    assert_eq!(drift.len(), 1001);
    assert!(drift.iter().all(|&d| d <= 1e-13));
    let r = report(&out);
    assert_eq!(r["subcommand"], "simulate");
    assert_eq!(r["passed"], true);
}

#[test]
fn exhaustive_resonance_scan() {
    let out = scratch("resonance");
    let o = kdv5(&["resonance", "--exhaustive", "200"], &out);
    assert!(o.status.success());
    let scans: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("resonance.json")).unwrap()).unwrap();
    assert_eq!(scans[0]["mismatches"], 0);
    assert_eq!(scans[1]["mismatches"], 0);
    assert_eq!(scans[1]["checked"], 401u64.pow(3));
    assert!(scans[2]["mismatches"].as_u64().unwrap() > 0);
    assert!(scans[2]["first_mismatch"]["n"].is_array());
}

#[test]
fn counterexample_slope_at_one_half() {
    let out = scratch("counterexample");
    let o = kdv5(&["counterexample", "--b", "0.5"], &out);
    assert!(o.status.success());
    let slope = column(&out.join("slopes.csv"), "slope");
    assert_eq!(slope.len(), 1);
    assert!((0.8..=1.2).contains(&slope[0]), "{slope:?}");
    assert_eq!(column(&out.join("counterexample.csv"), "N").len(), 7);
}

#[test]
fn schema_violations_exit_with_two() {
    let out = scratch("schema");
    let unknown = write_config(&out, "[solver]\nscheme = \"etdrk4\"\ndt = 1e-5\nt_end = 1e-3\nsubsteps = 2\n");
    assert_eq!(kdv5(&["simulate", "--config", &unknown], &out).status.code(), Some(2));
    let ragged = write_config(&out, "[solver]\nscheme = \"etdrk4\"\ndt = 3e-5\nt_end = 1e-4\n");
    assert_eq!(kdv5(&["simulate", "--config", &ragged], &out).status.code(), Some(2));
    let missing = out.join("absent.toml");
    assert_eq!(kdv5(&["simulate", "--config", missing.to_str().unwrap()], &out).status.code(), Some(2));
    assert!(!out.join("report.json").exists());
}

#[test]
fn blow_up_exits_with_three() {
    let out = scratch("blowup");
    let cfg = write_config(
        &out,
        r#"
[grid]
modes = 8

[equation]
coefficients = [-3.0e4, 0.0, 0.0]
renormalized = false

[initial]
kind = "modes"
terms = [{ n = 1, cos = 1000.0 }]

[solver]
scheme = "ifrk4"
dt = 0.1
t_end = 10.0
"#,
    );
    let o = kdv5(&["simulate", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step"));
}

#[test]
fn invariant_failures_exit_with_one_and_point_at_a_row() {
    let out = scratch("failure");
    let cfg = write_config(
        &out,
        r#"
[grid]
modes = 16

[initial]
kind = "modes"
terms = [{ n = 1, cos = 3.0 }, { n = 2, sin = 2.0 }]

[solver]
scheme = "etdrk4"
dt = 1e-3
t_end = 1e-2
"#,
    );
    let o = kdv5(&["simulate", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("conservation.csv:"), "{stderr}");
    assert_eq!(report(&out)["passed"], false);
}

#[test]
fn outputs_are_deterministic_under_a_seed() {
    let (a, b, c) = (scratch("det-a"), scratch("det-b"), scratch("det-c"));
    let cfg = write_config(&a, SMALL);
    for dir in [&a, &b] {
        assert!(kdv5(&["simulate", "--config", &cfg], dir).status.success());
    }
    assert!(kdv5(&["simulate", "--config", &cfg, "--seed", "5"], &c).status.success());
    let read = |d: &Path| fs::read(d.join("conservation.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(fs::read(a.join("final_state.csv")).unwrap(), fs::read(b.join("final_state.csv")).unwrap());
    assert_eq!(report(&c)["seed"], 5);
}

#[test]
fn gauge_on_a_small_run() {
    let out = scratch("gauge");
    let cfg = write_config(&out, &format!("{SMALL}\n[gauge]\ns = 1.0\nseparations = [1e-3, 1e-4]\n"));
    let o = kdv5(&["gauge", "--config", &cfg, "--threads", "1"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(column(&out.join("bicontinuity.csv"), "eps"), vec![1e-3, 1e-4]);
}
