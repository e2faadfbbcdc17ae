//! Shipped human reference values. Marks compare direction and
//! significance only; the numbers are carried into reports for context.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Positive,
    Negative,
    /// Humans show no reliable effect.
    Null,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub key: String,
    pub statistic: String,
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternate_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    pub expectation: Option<Expectation>,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanReference {
    pub version: u32,
    pub entries: Vec<ReferenceEntry>,
}

const BUNDLED: &str = include_str!("../../data/human_reference.json");

impl HumanReference {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled human reference is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let r: HumanReference = serde_json::from_str(text)?;
        let mut keys: Vec<&str> = r.entries.iter().map(|e| e.key.as_str()).collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("duplicate reference key `{}`", w[0])));
        }
        if let Some(e) = r.entries.iter().find(|e| e.source.trim().is_empty()) {
            return Err(Error::Validation(format!("reference `{}` has no source", e.key)));
        }
        Ok(r)
    }

    pub fn get(&self, key: &str) -> Option<&ReferenceEntry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_values() {
        let r = HumanReference::bundled();
        let corr = r.get("e1.correlation").unwrap();
        assert_eq!(corr.value, Some(-0.94));
        assert_eq!(corr.expectation, Some(Expectation::Negative));
        assert_eq!(r.get("e1.interaction").unwrap().value, Some(1161.3));
        assert_eq!(r.get("e1.interaction").unwrap().alternate_values, vec![1336.2]);
        assert_eq!(r.get("e1.icaus.verb_class").unwrap().value, Some(681.3));
        assert_eq!(r.get("e1.icons.verb_class").unwrap().value, Some(487.8));
        assert_eq!(r.get("e1.anchor.se_icons_object").unwrap().value, Some(0.952));
        assert_eq!(r.get("e1.anchor.es_icons_subject").unwrap().value, Some(0.779));
        assert_eq!(r.get("e2.explanation.se").unwrap().value, Some(0.822));
        assert_eq!(r.get("e2.explanation.es").unwrap().value, Some(0.806));
        assert_eq!(r.get("e2.fullstop.se").unwrap().value, Some(0.582));
        assert_eq!(r.get("e2.fullstop.es").unwrap().value, Some(0.602));
        let icpt = r.get("e2.intercept").unwrap();
        assert_eq!((icpt.estimate, icpt.standard_error, icpt.value), (Some(2.03), Some(0.28), Some(7.29)));
        assert_eq!(r.get("e2.verb_class").unwrap().expectation, Some(Expectation::Null));
        assert_eq!(r.get("e3.object.verb_class").unwrap().value, Some(6.97));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let text = r#"{"version":1,"entries":[
            {"key":"a","statistic":"r","value":1,"expectation":null,"source":"x"},
            {"key":"a","statistic":"r","value":1,"expectation":null,"source":"x"}]}"#;
        assert!(HumanReference::parse(text).is_err());
    }
}
