//! Uniform JSON records for verification checks.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One verification outcome: what was checked, on which inputs, the measured
/// quantity, the bound it was compared against, and the verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub inputs: Value,
    pub measured: Value,
    pub bound: Value,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(
        check: impl Into<String>,
        inputs: Value,
        measured: impl Into<Value>,
        bound: impl Into<Value>,
        pass: bool,
    ) -> Self {
        Self { check: check.into(), inputs, measured: measured.into(), bound: bound.into(), pass }
    }

    /// One-line human summary, e.g. `PASS floor_check measured=0.1 bound=0.05`.
    pub fn summary(&self) -> String {
        format!(
            "{} {} measured={} bound={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            compact(&self.measured),
            compact(&self.bound)
        )
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn summary_line() {
        let r = CheckRecord::new("angle", json!({"p": [1.0, 0.0]}), 0.5, 1.0, true);
        assert_eq!(r.summary(), "PASS angle measured=0.5 bound=1.0");
        let r = CheckRecord::new("eps", json!(null), "1/8", "1/9", false);
        assert_eq!(r.summary(), "FAIL eps measured=1/8 bound=1/9");
        assert!(!all_pass(&[r]));
    }
}
