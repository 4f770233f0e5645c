//! Running a scenario and rendering the outcome.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::checks::{run_check, CheckName};
use crate::config::{Scenario, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: CheckName,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: f64,
    /// Wall-clock seconds; omitted when timing is disabled.
    pub runtime_s: Option<f64>,
    pub expected_error: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub evidence: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub expected_errors: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub seed: u64,
    pub threads: Option<usize>,
    pub strict: bool,
    pub config: ScenarioConfig,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub strict: bool,
    pub timing: bool,
    pub threads: Option<usize>,
}

impl CheckReport {
    /// Whether this entry keeps the run from succeeding.
    pub fn counts_as_failure(&self, strict: bool) -> bool {
        match self.status {
            Status::Pass => false,
            Status::Fail => true,
            Status::Error => strict || !self.expected_error,
        }
    }
}

impl Report {
    pub fn all_pass(&self) -> bool {
        !self.checks.iter().any(|c| c.counts_as_failure(self.strict))
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn text_summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {} (dim {}, {}, seed {})", self.config.name, self.config.dim, self.config.char_kind, self.seed);
        for c in &self.checks {
            let label = match c.status {
                Status::Pass => "PASS ",
                Status::Fail => "FAIL ",
                Status::Error if c.expected_error && !self.strict => "XERR ",
                Status::Error => "ERROR",
            };
            let residual = c.residual.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
            let _ = write!(s, "{label} {:<24} residual {residual:>10}  tol {:.1e}", c.name.name(), c.tolerance);
            if let Some(t) = c.runtime_s {
                let _ = write!(s, "  {t:.2} s");
            }
            if let Some(m) = &c.message {
                let _ = write!(s, "  ({m})");
            }
            s.push('\n');
        }
        let m = &self.summary;
        let _ = writeln!(
            s,
            "{} passed, {} failed, {} errors ({} expected)",
            m.passed, m.failed, m.errors, m.expected_errors
        );
        s
    }
}

/// Runs the checks sequentially in declaration order; each check
/// parallelizes internally.
pub fn run_scenario(scenario: &Scenario, options: RunOptions) -> Report {
    let cfg = &scenario.config;
    let mut checks = Vec::with_capacity(cfg.checks.len());
    for &name in &cfg.checks {
        let tol = cfg.tolerance(name);
        let expected_error = cfg.expected_errors.contains(&name);
        let start = Instant::now();
        let outcome = run_check(name, scenario);
        let runtime_s = options.timing.then(|| start.elapsed().as_secs_f64());
        let entry = match outcome {
            Ok(m) => CheckReport {
                name,
                status: if m.residual <= tol { Status::Pass } else { Status::Fail },
                residual: Some(m.residual),
                tolerance: tol,
                runtime_s,
                expected_error,
                message: None,
                evidence: m.evidence,
            },
            Err(e) => CheckReport {
                name,
                status: Status::Error,
                residual: None,
                tolerance: tol,
                runtime_s,
                expected_error,
                message: Some(e.message),
                evidence: e.evidence,
            },
        };
        checks.push(entry);
    }
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let summary = Summary {
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        errors: count(Status::Error),
        expected_errors: checks
            .iter()
            .filter(|c| c.status == Status::Error && c.expected_error)
            .count(),
    };
    Report {
        tool: "lcf",
        version: env!("CARGO_PKG_VERSION"),
        schema: crate::config::SCHEMA_VERSION,
        seed: cfg.seed,
        threads: options.threads,
        strict: options.strict,
        config: cfg.clone(),
        checks,
        summary,
    }
}
