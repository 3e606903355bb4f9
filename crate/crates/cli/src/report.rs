//! Report assembly: versioned, deterministic JSON output of a scenario run.
//!
//! Reports are byte-deterministic for a given scenario: map keys are sorted,
//! no timestamps or environment data are recorded, and every number is a
//! plain JSON value (non-finite floats become null).

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Identifier of the report format; bumped on breaking changes.
pub const REPORT_SCHEMA: &str = "starmul.report/1";

/// Result of running one scenario: one entry per requested check, in
/// scenario order.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub scenario: String,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

/// Outcome of a single check.
#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    /// Human-readable explanation, present when something needs saying
    /// (failures, skipped preconditions, solver diagnostics).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Numeric and structural observations, sorted by key.
    pub values: BTreeMap<String, Value>,
}

impl CheckResult {
    pub fn new(name: &'static str) -> Self {
        CheckResult {
            name,
            pass: false,
            detail: None,
            values: BTreeMap::new(),
        }
    }

    pub fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            pass: false,
            detail: Some(detail.into()),
            values: BTreeMap::new(),
        }
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.values.insert(key.to_string(), value.into());
    }

    /// Insert a float, mapping non-finite values to null (JSON has no
    /// representation for them).
    pub fn put_f64(&mut self, key: &str, value: f64) {
        let v = serde_json::Number::from_f64(value)
            .map(Value::Number)
            .unwrap_or(Value::Null);
        self.values.insert(key.to_string(), v);
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_become_null() {
        let mut result = CheckResult::new("probe");
        result.put_f64("finite", 1.5);
        result.put_f64("infinite", f64::INFINITY);
        assert_eq!(result.values["finite"], Value::from(1.5));
        assert_eq!(result.values["infinite"], Value::Null);
    }

    #[test]
    fn report_serializes_with_sorted_value_keys() {
        let mut result = CheckResult::new("probe");
        result.put("zeta", 1);
        result.put("alpha", 2);
        result.pass = true;
        let report = Report {
            schema: REPORT_SCHEMA,
            scenario: "demo".into(),
            checks: vec![result],
            pass: true,
        };
        let text = report.to_json();
        let alpha = text.find("\"alpha\"").unwrap();
        let zeta = text.find("\"zeta\"").unwrap();
        assert!(alpha < zeta);
        assert!(text.contains("\"starmul.report/1\""));
        assert!(text.ends_with('\n'));
    }
}
