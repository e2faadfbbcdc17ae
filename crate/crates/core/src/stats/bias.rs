//! Per-verb coreference bias with bootstrap intervals.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{bootstrap_ci, derive_seed, pearson_r, PearsonResult};
use crate::design::{BiasType, VerbClass};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct BiasObservation {
    pub verb: String,
    pub verb_class: VerbClass,
    pub bias_type: BiasType,
    /// True when the continuation picked up the prompt's subject.
    pub subject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasRow {
    pub verb: String,
    pub verb_class: VerbClass,
    pub bias_type: BiasType,
    pub proportion_subject: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BiasTable {
    pub rows: Vec<BiasRow>,
}

impl BiasTable {
    pub fn get(&self, verb: &str, bias_type: BiasType) -> Option<&BiasRow> {
        self.rows
            .iter()
            .find(|r| r.verb == verb && r.bias_type == bias_type)
    }
}

/// Rows sorted by verb then bias type. Each row resamples its own
/// continuations with a seed derived from `seed` and the row's position.
pub fn per_verb_bias(observations: &[BiasObservation], resamples: usize, seed: u64) -> Result<BiasTable> {
    let mut cells: BTreeMap<(String, BiasType), (VerbClass, Vec<bool>)> = BTreeMap::new();
    for o in observations {
        cells
            .entry((o.verb.clone(), o.bias_type))
            .or_insert_with(|| (o.verb_class, Vec::new()))
            .1
            .push(o.subject);
    }
    let mut rows = Vec::with_capacity(cells.len());
    for (idx, ((verb, bias_type), (verb_class, obs))) in cells.into_iter().enumerate() {
        let n = obs.len();
        let proportion = obs.iter().filter(|&&s| s).count() as f64 / n as f64;
        let (lo, hi) = bootstrap_ci(&obs, resamples, 0.95, derive_seed(seed, idx as u64))?;
        rows.push(BiasRow {
            verb,
            verb_class,
            bias_type,
            proportion_subject: proportion,
            ci_low: lo.min(proportion).max(0.0),
            ci_high: hi.max(proportion).min(1.0),
            n,
        });
    }
    Ok(BiasTable { rows })
}

/// Correlates each verb's explanation-context bias with its consequence-context
/// bias, over verbs observed in both.
pub fn correlation_across_bias(table: &BiasTable) -> Result<PearsonResult> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for row in table.rows.iter().filter(|r| r.bias_type == BiasType::ICaus) {
        if let Some(other) = table.get(&row.verb, BiasType::ICons) {
            x.push(row.proportion_subject);
            y.push(other.proportion_subject);
        }
    }
    pearson_r(&x, &y)
}
