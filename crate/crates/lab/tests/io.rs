//! Configuration files and report serialization.

use std::fs;
use std::path::Path;

use kdv5_lab::config::{CoefficientSpec, InitialData};
use kdv5_lab::{ExperimentConfig, Invariant, Report};

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}

#[test]
fn shipped_settings_are_read_as_written() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let p = ExperimentConfig::load(&dir.join("perturbed.toml")).unwrap();
    assert_eq!(p.equation.coefficients, CoefficientSpec::Triple([-30.0, 20.0, 5.0]));
    assert!(!p.equation.renormalized);
    assert!(matches!(p.initial, InitialData::Random { max_mode: 8, .. }));
    let c = ExperimentConfig::load(&dir.join("counterexample.toml")).unwrap();
    assert_eq!(c.counterexample.n_list, vec![64, 128, 256, 512, 1024, 2048, 4096]);
    assert_eq!(c.grid, ExperimentConfig::default().grid);
}

#[test]
fn report_json_shape() {
    let r = Report::new(
        "simulate",
        3,
        vec![
            Invariant::at_most("mass drift", 0.0, 1e-13).at("conservation.csv", 2),
            Invariant::at_least("ratio", 10.0, 1e3),
        ],
    );
    assert!(!r.passed);
    assert_eq!(r.failures().count(), 1);
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["invariants"][0]["pointer"], "conservation.csv:2");
    assert!(v["invariants"][1].get("pointer").is_none());
    assert_eq!(v["invariants"][1]["condition"], ">= 1e3");
}

#[test]
fn config_serializes_back_to_an_equal_config() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = ExperimentConfig::load(&dir.join("random_small.toml")).unwrap();
    let again = ExperimentConfig::from_toml(&toml::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, again);
}
