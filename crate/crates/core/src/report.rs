//! Itemized bound reports with JSON and CSV output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONSTANT_CAVEAT: &str =
    "total is stated modulo an unspecified absolute factor depending only on p; multiply by a user constant if one is known";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub label: String,
    pub value: f64,
    pub equation_tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: String,
    pub terms: Vec<BoundTerm>,
    pub total_modulo_constant: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_z_range: Option<[f64; 2]>,
    pub constant_caveat: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Build from `(label, value, tag)` triples; every value must be finite
    /// and nonnegative.
    pub fn new(bound: &str, terms: Vec<(&str, f64, &str)>) -> Result<Self> {
        let terms: Vec<BoundTerm> = terms
            .into_iter()
            .map(|(label, value, tag)| BoundTerm { label: label.into(), value, equation_tag: tag.into() })
            .collect();
        if let Some(t) = terms.iter().find(|t| !(t.value >= 0.0) || !t.value.is_finite()) {
            return Err(Error::Evaluation(format!("term {} evaluated to {}", t.label, t.value)));
        }
        let total = terms.iter().map(|t| t.value).sum();
        Ok(Self {
            bound: bound.into(),
            terms,
            total_modulo_constant: total,
            z: None,
            valid_z_range: None,
            constant_caveat: CONSTANT_CAVEAT.into(),
            user_constant: None,
            notes: Vec::new(),
        })
    }

    pub fn with_z(mut self, z: f64, range: [f64; 2]) -> Self {
        self.z = Some(z);
        self.valid_z_range = Some(range);
        self
    }

    pub fn with_user_constant(mut self, c: Option<f64>) -> Self {
        self.user_constant = c;
        self
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.label == label).map(|t| t.value)
    }

    /// Total times the user constant (or 1).
    pub fn scaled_total(&self) -> f64 {
        self.user_constant.unwrap_or(1.0) * self.total_modulo_constant
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per term under the header `label,value,equation_tag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,value,equation_tag\n");
        for t in &self.terms {
            out.push_str(&format!("{},{:e},{}\n", t.label, t.value, t.equation_tag));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_is_sum_and_negative_terms_are_rejected() {
        let r = BoundReport::new("demo", vec![("a", 0.25, "x"), ("b", 0.5, "y")]).unwrap();
        assert_eq!(r.total_modulo_constant, 0.75);
        assert!(BoundReport::new("demo", vec![("a", -1.0, "x")]).is_err());
        assert!(BoundReport::new("demo", vec![("a", f64::NAN, "x")]).is_err());
    }

    #[test]
    fn csv_has_stable_header() {
        let r = BoundReport::new("demo", vec![("a", 0.25, "x")]).unwrap();
        assert_eq!(r.to_csv(), "label,value,equation_tag\na,2.5e-1,x\n");
        let back: BoundReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
