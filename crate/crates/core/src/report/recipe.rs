//! Declarative analysis recipes: ordered model comparisons per experiment.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::Experiment;
use crate::error::{Error, Result};
use crate::stats::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Likelihood-ratio test of `full` against `reduced`.
    Lrt,
    /// As `Lrt`, but reported as the Wald z of the intercept with a
    /// one-tailed p alongside the two-sided one.
    Intercept,
    /// Pearson correlation of per-verb I-Caus and I-Cons biases.
    Correlation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub name: String,
    pub kind: StepKind,
    #[serde(default)]
    pub full: Option<String>,
    #[serde(default)]
    pub reduced: Option<String>,
    /// Column → level restrictions, all of which must hold.
    #[serde(default)]
    pub subset: BTreeMap<String, String>,
    /// Run only if this earlier step was significant.
    #[serde(default)]
    pub when: Option<String>,
    /// Run only if this earlier step was not significant.
    #[serde(default)]
    pub when_not: Option<String>,
    #[serde(default)]
    pub reference: Option<String>,
}

impl Step {
    /// `all` or `col=level;...` in key order.
    pub fn subset_label(&self) -> String {
        if self.subset.is_empty() {
            "all".to_string()
        } else {
            self.subset
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";")
        }
    }

    pub fn specs(&self) -> Result<Option<(ModelSpec, ModelSpec)>> {
        match (&self.full, &self.reduced) {
            (Some(f), Some(r)) => Ok(Some((ModelSpec::parse(f)?, ModelSpec::parse(r)?))),
            (None, None) => Ok(None),
            _ => Err(Error::Validation(format!("step `{}` needs both `full` and `reduced`", self.name))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecipe {
    pub response: String,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipes {
    pub version: u32,
    pub experiments: BTreeMap<Experiment, ExperimentRecipe>,
}

const BUNDLED: &str = include_str!("../../data/recipes.toml");

impl Recipes {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "bundled recipes").expect("bundled recipes are valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let recipes: Recipes = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            line: e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        recipes.validate()?;
        Ok(recipes)
    }

    pub fn get(&self, experiment: Experiment) -> Result<&ExperimentRecipe> {
        self.experiments
            .get(&experiment)
            .ok_or_else(|| Error::Validation(format!("no analysis recipe for {experiment}")))
    }

    /// Formulas parse, model steps are nested in their terms, and gates
    /// point backwards.
    fn validate(&self) -> Result<()> {
        for (exp, recipe) in &self.experiments {
            let mut seen: Vec<&str> = Vec::new();
            for step in &recipe.steps {
                if seen.contains(&step.name.as_str()) {
                    return Err(Error::Validation(format!("{exp}: duplicate step `{}`", step.name)));
                }
                for gate in [&step.when, &step.when_not].into_iter().flatten() {
                    if !seen.contains(&gate.as_str()) {
                        return Err(Error::Validation(format!(
                            "{exp}: step `{}` is gated on `{gate}`, which does not precede it",
                            step.name
                        )));
                    }
                }
                match (step.kind, step.specs()?) {
                    (StepKind::Correlation, None) => {}
                    (StepKind::Correlation, Some(_)) => {
                        return Err(Error::Validation(format!("{exp}: correlation step `{}` takes no formulas", step.name)))
                    }
                    (_, None) => {
                        return Err(Error::Validation(format!("{exp}: step `{}` needs formulas", step.name)))
                    }
                    (_, Some((full, reduced))) => {
                        if full.response != recipe.response || reduced.response != recipe.response {
                            return Err(Error::Validation(format!(
                                "{exp}: step `{}` does not model `{}`",
                                step.name, recipe.response
                            )));
                        }
                        let full_terms = full.coefficient_names();
                        if let Some(t) = reduced.coefficient_names().iter().find(|t| !full_terms.contains(t)) {
                            return Err(Error::NotNested(format!("{exp}: step `{}` drops nothing but adds `{t}`", step.name)));
                        }
                    }
                }
                seen.push(&step.name);
            }
        }
        Ok(())
    }
}
