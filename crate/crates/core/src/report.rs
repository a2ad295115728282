use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of a numerical verification, serialized as
/// `{check, pass, worst_margin, samples, params, details}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub pass: bool,
    /// Smallest margin observed; negative means the check was violated.
    pub worst_margin: f64,
    pub samples: usize,
    pub params: Value,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Report {
    pub fn new(check: impl Into<String>, pass: bool, worst_margin: f64, samples: usize, params: Value) -> Self {
        Report { check: check.into(), pass, worst_margin, samples, params, details: Value::Null }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Halton low-discrepancy sequence in the given prime base, index >= 1.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while index > 0 {
        f /= b;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Weyl (additive golden-ratio) sequence in [0, 1).
pub fn weyl(index: u64) -> f64 {
    const G: f64 = 0.618_033_988_749_894_9;
    (index as f64 * G).fract()
}
