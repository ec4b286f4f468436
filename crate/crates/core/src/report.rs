//! Uniform result type for axiom and consistency checks.

use serde::{Deserialize, Serialize};

/// One concrete counterexample from a failed check.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Witness {
    /// Human-readable description of the inputs that failed.
    pub input: String,
    pub expected: String,
    pub got: String,
}

/// Outcome of a single check.
///
/// `passed` holds exactly when `residual <= tolerance`.  Exact checks use
/// `tolerance = 0` and report the number of violated identities as the
/// residual, so a clean run is always `0 <= 0`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

impl CheckReport {
    /// Exact check: passes iff there are no witnesses.
    pub fn exact(name: impl Into<String>, witnesses: Vec<Witness>) -> Self {
        CheckReport {
            name: name.into(),
            passed: witnesses.is_empty(),
            residual: witnesses.len() as f64,
            tolerance: 0.0,
            witnesses,
        }
    }

    /// Residual check against a tolerance.
    pub fn with_residual(
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        witnesses: Vec<Witness>,
    ) -> Self {
        CheckReport {
            name: name.into(),
            passed: residual.is_finite() && residual <= tolerance,
            residual,
            tolerance,
            witnesses,
        }
    }
}
