//! Check records and JSON-lines ledgers.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check: String,
    pub paper_ref: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub records: Vec<CheckRecord>,
}

impl Ledger {
    pub fn new() -> Self {
        Ledger::default()
    }

    /// Records `residual` with `pass = residual <= limit`; NaN never passes.
    pub fn push(&mut self, suite: &str, check: impl Into<String>, label: impl Into<String>, residual: f64, limit: f64) {
        self.records.push(CheckRecord {
            suite: suite.to_string(),
            check: check.into(),
            paper_ref: label.into(),
            residual,
            pass: residual <= limit,
        });
    }

    /// A yes/no check, stored with residual 0 or 1.
    pub fn push_flag(&mut self, suite: &str, check: impl Into<String>, label: impl Into<String>, ok: bool) {
        self.push(suite, check, label, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    /// A failed step that produced no residual.
    pub fn push_error(&mut self, suite: &str, check: impl Into<String>, err: &crate::Error) {
        self.push(suite, check, format!("error: {err}"), f64::INFINITY, 0.0);
    }

    pub fn extend(&mut self, other: Ledger) {
        self.records.extend(other.records);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Largest residual among records whose check name starts with `prefix`.
    pub fn max_residual(&self, prefix: &str) -> f64 {
        self.records
            .iter()
            .filter(|r| r.check.starts_with(prefix))
            .map(|r| if r.residual.is_nan() { f64::INFINITY } else { r.residual })
            .fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One JSON object per line, in insertion order.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(s: &str) -> crate::Result<Self> {
        let records = s
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<CheckRecord>, _>>()?;
        Ok(Ledger { records })
    }
}
