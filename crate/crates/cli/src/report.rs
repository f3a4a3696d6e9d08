//! Machine-readable task reports.

use serde::{Deserialize, Serialize};

use crate::config::{Task, TaskConfig, SCHEMA_VERSION};

/// How a reported number is justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    /// Closed-form arithmetic or exact coefficient bookkeeping.
    Exact,
    /// A singular value with a residual check.
    SvdCertified,
    /// An end of a primal/dual bracket for a semidefinite program.
    SdpBracketed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub certificate: Certificate,
}

/// `lhs ≤ rhs`. Checks with `enforced = false` are informational and do not
/// affect `passed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
    pub enforced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    pub task: Task,
    pub seed: Option<u64>,
    pub config: TaskConfig,
    pub quantities: Vec<Quantity>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(config: &TaskConfig, seed: Option<u64>) -> Self {
        Report {
            tool: "freeprod".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            schema: SCHEMA_VERSION,
            task: config.task,
            seed,
            config: config.clone(),
            quantities: Vec::new(),
            assertions: Vec::new(),
            passed: true,
            timing_ms: None,
        }
    }

    pub fn quantity(&mut self, name: impl Into<String>, value: f64, certificate: Certificate) {
        self.quantities.push(Quantity {
            name: name.into(),
            value,
            certificate,
        });
    }

    /// Records `lhs ≤ rhs`.
    pub fn check(&mut self, name: impl Into<String>, lhs: f64, rhs: f64) {
        self.push_check(name.into(), lhs, rhs, true);
    }

    pub fn note(&mut self, name: impl Into<String>, lhs: f64, rhs: f64) {
        self.push_check(name.into(), lhs, rhs, false);
    }

    fn push_check(&mut self, name: String, lhs: f64, rhs: f64, enforced: bool) {
        let passed = lhs <= rhs;
        if enforced && !passed {
            self.passed = false;
        }
        self.assertions.push(Assertion {
            name,
            lhs,
            rhs,
            passed,
            enforced,
        });
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.quantities.iter().find(|q| q.name == name).map(|q| q.value)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
