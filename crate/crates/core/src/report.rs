//! Structured records of verification runs.

use crate::estimate::Estimate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Outcome of one check on one subject (body, density, or parameter grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub check: String,
    pub subject: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub constants: BTreeMap<String, f64>,
    pub measured: BTreeMap<String, Estimate>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(check: impl Into<String>, subject: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            subject: subject.into(),
            inputs: BTreeMap::new(),
            constants: BTreeMap::new(),
            measured: BTreeMap::new(),
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.inputs.insert(key.to_string(), v);
        self
    }

    pub fn constant(&mut self, key: &str, value: f64) -> &mut Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn measure(&mut self, key: &str, value: Estimate) -> &mut Self {
        self.measured.insert(key.to_string(), value);
        self
    }

    /// Records an exact (zero-error) value.
    pub fn exact(&mut self, key: &str, value: f64) -> &mut Self {
        self.measure(key, Estimate::exact(value))
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    /// Fails the report with `why` unless `ok`.
    pub fn require(&mut self, ok: bool, why: impl Into<String>) -> &mut Self {
        if !ok {
            self.pass = false;
            self.notes.push(format!("FAILED: {}", why.into()));
        }
        self
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.measured.get(key).map(|e| e.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn require_flips_pass_and_records_reason() {
        let mut r = Report::new("eq4", "grid");
        r.exact("max_abs_error", 1e-17).require(true, "fine");
        assert!(r.pass && r.notes.is_empty());
        r.require(false, "too large");
        assert!(!r.pass);
        assert_eq!(r.notes, vec!["FAILED: too large".to_string()]);
        let json = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
