//! Regression, tests and resampling used by the analysis recipes.

mod bias;
mod bootstrap;
mod dense;
mod dist;
mod formula;
mod frame;
mod glmm;
mod logistic;
mod lrt;
mod pearson;

pub use bias::{correlation_across_bias, per_verb_bias, BiasObservation, BiasRow, BiasTable};
pub use bootstrap::{bootstrap_ci, derive_seed};
pub use dist::{chisq_sf, t_two_sided};
pub use formula::{ModelSpec, RandomPart, Term};
pub use frame::{Column, ModelFrame, RandomDesign};
pub use glmm::{fit_glmm, fit_model, GlmmOptions};
pub use logistic::{fit_logistic, fit_logistic_traced, log_likelihood, LogisticOptions};
pub use lrt::{lrt, LrtResult};
pub use pearson::{pearson_r, PearsonResult};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

pub const INTERCEPT: &str = "(Intercept)";

/// Values keyed by term name, in model order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NamedVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl NamedVector {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Self {
        assert_eq!(names.len(), values.len());
        NamedVector { names, values }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }
}

impl Serialize for NamedVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.len()))?;
        for (name, value) in self.iter() {
            map.serialize_entry(name, &value)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Formula the fit came from; empty for fits on raw matrices.
    pub formula: String,
    pub coefficients: NamedVector,
    pub standard_errors: NamedVector,
    pub z_values: NamedVector,
    pub log_likelihood: f64,
    /// Random-effect variances, keyed `group:term`.
    pub variance_components: NamedVector,
    pub converged: bool,
    pub separation: bool,
    pub n_used: usize,
    pub iterations: usize,
}

impl FitResult {
    pub fn n_params(&self) -> usize {
        self.coefficients.len() + self.variance_components.len()
    }
}

/// `log(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
