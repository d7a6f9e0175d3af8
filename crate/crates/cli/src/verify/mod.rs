//! The property suite behind `subcarve verify`.
//!
//! Checks register by name in a static table of trait objects. The runner
//! executes them concurrently, each with its own generator derived from the
//! run seed and the check name, and assembles the report in name order.

mod checks;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use subcarve::numerics::random::{Rng, SeedSplitter};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::Outcome;

pub const EXIT_CHECK_FAILED: u8 = 1;

/// Result of one property check.
pub struct Finding {
    pub passed: bool,
    /// Largest deviation observed, in the units of `bound`.
    pub residual: f64,
    pub bound: f64,
    pub samples: usize,
    pub detail: String,
}

pub trait PropertyCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, cfg: &RunConfig, rng: &mut Rng) -> subcarve::Result<Finding>;
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
    pub bound: f64,
    pub samples: usize,
    pub detail: String,
}

pub fn registry() -> &'static [&'static dyn PropertyCheck] {
    checks::REGISTRY
}

pub fn find_check(name: &str) -> Option<&'static dyn PropertyCheck> {
    registry().iter().copied().find(|c| c.name() == name)
}

fn run_one(check: &dyn PropertyCheck, cfg: &RunConfig) -> CheckReport {
    let mut rng = SeedSplitter::new(cfg.seed).child(check.name());
    match check.run(cfg, &mut rng) {
        Ok(f) => CheckReport {
            name: check.name(),
            passed: f.passed,
            residual: f.residual,
            bound: f.bound,
            samples: f.samples,
            detail: f.detail,
        },
        Err(e) => CheckReport {
            name: check.name(),
            passed: false,
            residual: f64::INFINITY,
            bound: 0.0,
            samples: 0,
            detail: format!("error: {e}"),
        },
    }
}

/// Runs `checks` concurrently; reports are sorted by name.
pub fn run_checks(checks: &[&'static dyn PropertyCheck], cfg: &RunConfig) -> Vec<CheckReport> {
    let mut reports: Vec<CheckReport> = checks.par_iter().map(|c| run_one(*c, cfg)).collect();
    reports.sort_by(|a, b| a.name.cmp(b.name));
    reports
}

/// Every registered check, or only those named in `only`.
pub fn select(only: &[String]) -> Result<Vec<&'static dyn PropertyCheck>, CliError> {
    if only.is_empty() {
        return Ok(registry().to_vec());
    }
    only.iter()
        .map(|name| {
            find_check(name).ok_or_else(|| {
                let known: Vec<&str> = registry().iter().map(|c| c.name()).collect();
                CliError::Usage(format!(
                    "unknown check '{name}'; expected one of {}",
                    known.join(", ")
                ))
            })
        })
        .collect()
}

pub fn run_suite(cfg: &RunConfig, only: &[String]) -> Result<Outcome, CliError> {
    let mut checks = select(only)?;
    checks.sort_by_key(|c| c.name());
    checks.dedup_by_key(|c| c.name());
    let reports = run_checks(&checks, cfg);
    let passed = reports.iter().all(|r| r.passed);
    // Infinite residuals are not representable in JSON.
    let checks: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("reports serialize");
            if !r.residual.is_finite() {
                v["residual"] = json!("inf");
            }
            v
        })
        .collect();
    Ok(Outcome {
        result: json!({
            "passed": passed,
            "failed": reports.iter().filter(|r| !r.passed).count(),
            "checks": checks,
        }),
        passed,
        failure_code: EXIT_CHECK_FAILED,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_resolvable() {
        let mut names: Vec<&str> = registry().iter().map(|c| c.name()).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
        for name in names {
            assert_eq!(find_check(name).unwrap().name(), name);
        }
        assert!(find_check("no_such_check").is_none());
        assert!(matches!(
            select(&["no_such_check".into()]),
            Err(CliError::Usage(_))
        ));
        assert_eq!(select(&[]).unwrap().len(), registry().len());
    }
}
