//! Machine-readable verification reports.

use serde::{Deserialize, Serialize};

/// Schema version stamped into every serialized report.
pub const SCHEMA_VERSION: u32 = 1;

/// One named check: two independently computed sides, their residual and the
/// tolerance it was held to. `pass` always equals `residual <= tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    /// Two-sided comparison with a relative tolerance against `scale`
    /// (typically the L1 mass of the integrands, floored at 1).
    pub fn two_sided(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        rel_tol: f64,
        scale: f64,
    ) -> Self {
        let scale = scale.abs().max(lhs.abs()).max(rhs.abs()).max(1e-30);
        Self::new(name, lhs, rhs, (lhs - rhs).abs() / scale, rel_tol)
    }
}

/// Reproducibility block: everything needed to re-run the numbers.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Environment {
    /// Per-axis grid counts of the torus grid in use (empty when no grid).
    pub grid: Vec<usize>,
    pub seed: u64,
    /// Base finite-difference step.
    pub step: f64,
    pub richardson_levels: u32,
    pub mc_samples: usize,
    pub version: String,
    /// Wall-clock stamp; excluded from byte-identity comparisons.
    pub timestamp: String,
}

/// A self-contained verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub environment: Environment,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, environment: Environment) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            checks: Vec::new(),
            environment,
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = CheckRecord>) {
        self.checks.extend(checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_tracks_residual() {
        let ok = CheckRecord::new("x", 1.0, 1.0, 1e-9, 1e-6);
        assert!(ok.pass);
        let bad = CheckRecord::new("x", 1.0, 2.0, 1.0, 1e-6);
        assert!(!bad.pass);
    }

    #[test]
    fn two_sided_scales_relative_residual() {
        let c = CheckRecord::two_sided("t", 100.0, 100.0005, 1e-5, 1.0);
        assert!(c.pass, "residual {}", c.residual);
        let c = CheckRecord::two_sided("t", 100.0, 100.5, 1e-5, 1.0);
        assert!(!c.pass);
    }
}
