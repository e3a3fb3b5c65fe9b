//! Scenario files, verification suites and plot data for the `salg` command-line driver.

pub mod fixtures;
pub mod plot;
pub mod scenario;
pub mod suites;

pub use plot::{emit_plotdata, linspace, Quantity, Sweep};
pub use scenario::{kahler_window, Scenario, Suite};
pub use suites::Outcome;

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub seconds: f64,
    pub seed: u64,
    pub residuals: BTreeMap<String, f64>,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<serde_json::Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub passed: bool,
    pub seconds: f64,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn suite(&self, s: Suite) -> Option<&SuiteReport> {
        self.suites.iter().find(|r| r.suite == s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn run_one(sc: &Scenario, s: Suite) -> SuiteReport {
    let t0 = Instant::now();
    let (residuals, mut failures, table) = match suites::run(s, sc) {
        Ok(o) => (o.residuals, o.failures, o.table),
        Err(e) => (BTreeMap::new(), vec![format!("error: {e:#}")], None),
    };
    // non-finite values are not representable in JSON
    let residuals: BTreeMap<String, f64> = residuals
        .into_iter()
        .map(|(k, v)| {
            if !v.is_finite() {
                failures.push(format!("{k} is not finite"));
            }
            (k, if v.is_finite() { v } else { f64::MAX })
        })
        .collect();
    SuiteReport { suite: s, passed: failures.is_empty(), seconds: t0.elapsed().as_secs_f64(), seed: sc.seed, residuals, failures, table }
}

/// Runs every requested suite concurrently; the report keeps the requested order.
pub fn run_suite(sc: &Scenario) -> Report {
    let t0 = Instant::now();
    let suites: Vec<SuiteReport> = sc.checks.par_iter().map(|s| run_one(sc, *s)).collect();
    Report {
        scenario: sc.name.clone(),
        seed: sc.seed,
        passed: suites.iter().all(|r| r.passed),
        seconds: t0.elapsed().as_secs_f64(),
        suites,
    }
}
