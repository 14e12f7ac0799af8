//! Pass/fail summary written as `report.json`.

use serde::Serialize;

/// One asserted invariant with the number it was judged on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invariant {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `<= 1e-13`.
    pub condition: String,
    /// Artifact row behind the value, e.g. `conservation.csv:412`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointer: Option<String>,
}

impl Invariant {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= limit,
            value,
            condition: format!("<= {limit:e}"),
            pointer: None,
        }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value >= limit,
            value,
            condition: format!(">= {limit:e}"),
            pointer: None,
        }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: (lo..=hi).contains(&value),
            value,
            condition: format!("in [{lo}, {hi}]"),
            pointer: None,
        }
    }

    pub fn holds(name: &str, passed: bool, condition: &str) -> Self {
        Self {
            name: name.to_string(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            condition: condition.to_string(),
            pointer: None,
        }
    }

    pub fn at(mut self, file: &str, row: usize) -> Self {
        self.pointer = Some(format!("{file}:{row}"));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub subcommand: String,
    pub seed: u64,
    pub passed: bool,
    pub invariants: Vec<Invariant>,
}

impl Report {
    pub fn new(subcommand: &str, seed: u64, invariants: Vec<Invariant>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            seed,
            passed: invariants.iter().all(|i| i.passed),
            invariants,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Invariant> {
        self.invariants.iter().filter(|i| !i.passed)
    }
}
