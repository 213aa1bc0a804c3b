//! Check results and per-`(n, k)` reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    pub max_abs_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Passes iff `max_abs_err` is finite and at most `tolerance`.
    ///
    /// Lower-bound checks report the shortfall below the bound and sign
    /// checks report the number of violations, both against tolerance 0.
    pub fn new(name: impl Into<String>, samples: usize, max_abs_err: f64, tolerance: f64) -> Self {
        let pass = max_abs_err.is_finite() && max_abs_err <= tolerance;
        // JSON has no NaN or infinity; a non-finite error is reported as f64::MAX.
        let max_abs_err = if max_abs_err.is_finite() {
            max_abs_err
        } else {
            f64::MAX
        };
        Self {
            name: name.into(),
            samples,
            max_abs_err,
            tolerance,
            pass,
        }
    }

    /// Re-judge against a different tolerance.
    pub fn with_tolerance(self, tolerance: f64) -> Self {
        let pass = self.max_abs_err < f64::MAX && self.max_abs_err <= tolerance;
        Self {
            tolerance,
            pass,
            ..self
        }
    }
}

/// Largest error over a sample set; NaN is sticky.
pub fn max_err(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc: f64, v| {
        if acc.is_nan() || v.is_nan() {
            f64::NAN
        } else {
            acc.max(v.abs())
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub n: usize,
    pub k: u32,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(n: usize, k: u32, seed: u64, checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            n,
            k,
            seed,
            checks,
            pass,
        }
    }

    pub fn failing(&self) -> impl Iterator<Item = &str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width table.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "n={} k={} seed={} {}\n",
            self.n,
            self.k,
            self.seed,
            if self.pass { "PASS" } else { "FAIL" }
        );
        let _ = writeln!(
            out,
            "{:<28} {:>8} {:>12} {:>12}  result",
            "check", "samples", "max_err", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<28} {:>8} {:>12.3e} {:>12.3e}  {}",
                c.name,
                c.samples,
                c.max_abs_err,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        out
    }
}
