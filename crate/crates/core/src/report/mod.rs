//! Experiment analyses: join designs with annotations, run the recipe steps
//! and collect the table cells, fits and plot data for each experiment.

pub mod emit;
pub mod recipe;
pub mod reference;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::annotate::{select_for_analysis, AnaphorForm, AnnotationRecord, ClauseType, CorefTarget, RelationLabel};
use crate::design::{BiasType, Experiment, Focus, PromptRecord, VerbClass};
use crate::error::{Error, Result};
use crate::stats::{
    correlation_across_bias, fit_model, lrt, per_verb_bias, BiasObservation, BiasTable, FitResult, GlmmOptions,
    ModelFrame, ModelSpec, INTERCEPT,
};

pub use emit::{emit, ReportMeta};
pub use recipe::{ExperimentRecipe, Recipes, Step, StepKind};
pub use reference::{Expectation, HumanReference, ReferenceEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DirectionMark {
    TowardHuman,
    AgainstHuman,
    NoEffect,
}

impl DirectionMark {
    /// `sign` is the sign of the estimate behind the test.
    pub fn assess(expectation: Expectation, significant: bool, sign: i8) -> DirectionMark {
        match expectation {
            Expectation::Null if significant => DirectionMark::AgainstHuman,
            Expectation::Null => DirectionMark::TowardHuman,
            _ if !significant || sign == 0 => DirectionMark::NoEffect,
            Expectation::Positive if sign > 0 => DirectionMark::TowardHuman,
            Expectation::Negative if sign < 0 => DirectionMark::TowardHuman,
            _ => DirectionMark::AgainstHuman,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DirectionMark::TowardHuman => "TowardHuman",
            DirectionMark::AgainstHuman => "AgainstHuman",
            DirectionMark::NoEffect => "NoEffect",
        }
    }
}

/// `*` p < .05, `**` p < .01, `***` p < .001.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// One row of the results table. A cell without a statistic is NA and says
/// why in `note`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatCell {
    pub step: String,
    pub subset: String,
    pub statistic_name: String,
    pub statistic: Option<f64>,
    pub df: Option<u32>,
    pub p_value: Option<f64>,
    pub p_one_tailed: Option<f64>,
    pub estimate: Option<f64>,
    pub significant: Option<bool>,
    pub mark: Option<DirectionMark>,
    pub reference: Option<String>,
    pub reference_value: Option<f64>,
    pub note: Option<String>,
}

impl StatCell {
    fn blank(step: &str, subset: &str, statistic_name: &str) -> Self {
        StatCell {
            step: step.to_string(),
            subset: subset.to_string(),
            statistic_name: statistic_name.to_string(),
            statistic: None,
            df: None,
            p_value: None,
            p_one_tailed: None,
            estimate: None,
            significant: None,
            mark: None,
            reference: None,
            reference_value: None,
            note: None,
        }
    }

    pub fn is_na(&self) -> bool {
        self.statistic.is_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepFits {
    pub step: String,
    pub subset: String,
    pub full: FitResult,
    pub reduced: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub verb_class: VerbClass,
    /// `subj` / `obj` for the forced-reference experiments.
    pub focus: Option<Focus>,
    pub category: String,
    pub count: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum PlotData {
    /// Per-verb subject proportions (1 = subject, 0 = object coreference).
    Bias(BiasTable),
    /// Discourse relations by verb class.
    Relations(Vec<CountRow>),
    /// First referring forms by focus and verb class.
    Forms(Vec<CountRow>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Accounting {
    pub total: usize,
    pub included: usize,
    pub excluded: BTreeMap<String, usize>,
}

impl Accounting {
    pub fn closes(&self) -> bool {
        self.included + self.excluded.values().sum::<usize>() == self.total
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExclusionRow {
    pub prompt_id: String,
    pub rank: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub cells: Vec<StatCell>,
    pub fits: Vec<StepFits>,
    pub plot: PlotData,
    pub accounting: Accounting,
    pub exclusions: Vec<ExclusionRow>,
}

impl ExperimentReport {
    pub fn cell(&self, step: &str) -> Option<&StatCell> {
        self.cells.iter().find(|c| c.step == step)
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub alpha: f64,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
    pub glmm: GlmmOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            alpha: 0.05,
            bootstrap_resamples: 2000,
            bootstrap_seed: 0,
            glmm: GlmmOptions::default(),
        }
    }
}

/// Everything an analysis needs besides the data.
pub struct Analysis<'a> {
    pub recipes: &'a Recipes,
    pub reference: &'a HumanReference,
    pub options: &'a AnalysisOptions,
}

pub fn run_experiment1(a: &Analysis<'_>, prompts: &[PromptRecord], annotations: &[AnnotationRecord]) -> Result<ExperimentReport> {
    run_experiment(a, Experiment::E1, prompts, annotations)
}

pub fn run_experiment2(a: &Analysis<'_>, prompts: &[PromptRecord], annotations: &[AnnotationRecord]) -> Result<ExperimentReport> {
    run_experiment(a, Experiment::E2, prompts, annotations)
}

pub fn run_experiment3(a: &Analysis<'_>, prompts: &[PromptRecord], annotations: &[AnnotationRecord]) -> Result<ExperimentReport> {
    run_experiment(a, Experiment::E3, prompts, annotations)
}

pub fn run_experiment4(a: &Analysis<'_>, prompts: &[PromptRecord], annotations: &[AnnotationRecord]) -> Result<ExperimentReport> {
    run_experiment(a, Experiment::E4, prompts, annotations)
}

/// Joins annotations to their prompts by id.
fn join<'p>(
    experiment: Experiment,
    prompts: &'p [PromptRecord],
    annotations: &[AnnotationRecord],
) -> Result<Vec<&'p PromptRecord>> {
    let by_id: HashMap<&str, &PromptRecord> = prompts.iter().map(|p| (p.id.as_str(), p)).collect();
    annotations
        .iter()
        .map(|a| {
            let p = by_id
                .get(a.prompt_id.as_str())
                .ok_or_else(|| Error::Validation(format!("annotation for unknown prompt `{}`", a.prompt_id)))?;
            if p.experiment != experiment {
                return Err(Error::Validation(format!("prompt `{}` belongs to {}, not {experiment}", p.id, p.experiment)));
            }
            Ok(*p)
        })
        .collect()
}

pub fn run_experiment(
    a: &Analysis<'_>,
    experiment: Experiment,
    prompts: &[PromptRecord],
    annotations: &[AnnotationRecord],
) -> Result<ExperimentReport> {
    let recipe = a.recipes.get(experiment)?;
    let mut records: Vec<AnnotationRecord> = annotations.to_vec();
    records.sort_by(|x, y| (&x.prompt_id, x.rank).cmp(&(&y.prompt_id, y.rank)));
    join(experiment, prompts, &records)?;
    let by_id: HashMap<&str, &PromptRecord> = prompts.iter().map(|p| (p.id.as_str(), p)).collect();

    let selection = select_for_analysis(&records, experiment);
    let mut excluded = BTreeMap::new();
    let mut exclusions = Vec::with_capacity(selection.excluded.len());
    for (r, reason) in &selection.excluded {
        *excluded.entry(reason.as_str().to_string()).or_insert(0) += 1;
        exclusions.push(ExclusionRow {
            prompt_id: r.prompt_id.clone(),
            rank: r.rank,
            reason: reason.as_str().to_string(),
        });
    }
    let accounting = Accounting {
        total: records.len(),
        included: selection.included.len(),
        excluded,
    };
    debug_assert!(accounting.closes());

    let included: Vec<(&PromptRecord, &AnnotationRecord)> =
        selection.included.iter().map(|r| (by_id[r.prompt_id.as_str()], r)).collect();
    if experiment == Experiment::E2 && included.is_empty() {
        return Err(Error::Validation(
            "no continuation carries an explicit discourse relation; nothing to analyse".into(),
        ));
    }

    let frame = build_frame(experiment, &recipe.response, &included)?;
    let bias = if experiment == Experiment::E1 {
        let obs: Vec<BiasObservation> = included
            .iter()
            .map(|(p, r)| BiasObservation {
                verb: p.verb.lemma.clone(),
                verb_class: p.verb.verb_class,
                bias_type: p.cell.bias_type.expect("E1 prompts carry a bias type"),
                subject: r.coref_target == CorefTarget::Subject,
            })
            .collect();
        Some(per_verb_bias(&obs, a.options.bootstrap_resamples, a.options.bootstrap_seed)?)
    } else {
        None
    };

    let mut runner = StepRunner {
        a,
        frame: &frame,
        cache: HashMap::new(),
        significant: HashMap::new(),
        fits: Vec::new(),
    };
    let mut cells = Vec::with_capacity(recipe.steps.len() + 4);
    for step in &recipe.steps {
        cells.push(runner.run(step, bias.as_ref())?);
    }
    cells.extend(descriptive_cells(a, experiment, &included));

    let plot = match experiment {
        Experiment::E1 => PlotData::Bias(bias.expect("computed for E1")),
        Experiment::E2 => PlotData::Relations(relation_counts(&records, &by_id)),
        Experiment::E3 | Experiment::E4 => PlotData::Forms(form_counts(&included)),
    };
    Ok(ExperimentReport {
        experiment,
        cells,
        fits: runner.fits,
        plot,
        accounting,
        exclusions,
    })
}

fn build_frame(experiment: Experiment, response: &str, rows: &[(&PromptRecord, &AnnotationRecord)]) -> Result<ModelFrame> {
    let y: Vec<bool> = rows
        .iter()
        .map(|(_, r)| match experiment {
            Experiment::E1 => r.coref_target == CorefTarget::Subject,
            Experiment::E2 => r.relation == RelationLabel::Explanation,
            Experiment::E3 | Experiment::E4 => r.anaphor_form == AnaphorForm::PersonalPronoun,
        })
        .collect();
    let verb_class: Vec<&str> = rows.iter().map(|(p, _)| p.verb.verb_class.code()).collect();
    let gender_order: Vec<&str> = rows.iter().map(|(p, _)| p.cell.gender_order.code()).collect();
    let verb: Vec<&str> = rows.iter().map(|(p, _)| p.verb.lemma.as_str()).collect();
    let mut frame = ModelFrame::new();
    frame
        .add_binary(response, &y)?
        .add_factor("verb_class", "SE", "ES", &verb_class)?
        .add_factor("gender_order", "fm", "mf", &gender_order)?
        .add_group("verb", &verb)?;
    if experiment == Experiment::E1 {
        let bias: Vec<&str> = rows.iter().map(|(p, _)| p.cell.bias_type.map_or("", BiasType::code)).collect();
        frame.add_factor("bias_type", "icaus", "icons", &bias)?;
    }
    if experiment.is_forced_reference() {
        let focus: Vec<&str> = rows.iter().map(|(p, _)| p.cell.focus.map_or("", Focus::code)).collect();
        frame.add_factor("focus", "subj", "obj", &focus)?;
    }
    Ok(frame)
}

struct StepRunner<'r, 'a> {
    a: &'r Analysis<'a>,
    frame: &'r ModelFrame,
    cache: HashMap<(String, String), std::result::Result<FitResult, String>>,
    /// Step name → significance; `None` when the step was NA.
    significant: HashMap<String, Option<bool>>,
    fits: Vec<StepFits>,
}

impl StepRunner<'_, '_> {
    fn run(&mut self, step: &Step, bias: Option<&BiasTable>) -> Result<StatCell> {
        let statistic_name = match step.kind {
            StepKind::Lrt => "chi_square",
            StepKind::Intercept => "z",
            StepKind::Correlation => "r",
        };
        let subset = step.subset_label();
        let mut cell = StatCell::blank(&step.name, &subset, statistic_name);
        let reference = step.reference.as_deref().map(|k| {
            self.a
                .reference
                .get(k)
                .ok_or_else(|| Error::Validation(format!("recipe step `{}` cites unknown reference `{k}`", step.name)))
        });
        let reference = reference.transpose()?;
        if let Some(r) = reference {
            cell.reference = Some(r.key.clone());
            cell.reference_value = r.value;
        }

        if let Some(note) = self.gate(step) {
            cell.note = Some(note);
            self.significant.insert(step.name.clone(), None);
            return Ok(cell);
        }
        let outcome = match step.kind {
            StepKind::Correlation => self.correlation(bias, &mut cell),
            StepKind::Lrt | StepKind::Intercept => self.compare(step, &mut cell),
        };
        match outcome {
            Ok(sign) => {
                let p = cell.p_value.expect("filled on success");
                let significant = p < self.a.options.alpha;
                cell.significant = Some(significant);
                cell.mark = reference
                    .and_then(|r| r.expectation)
                    .map(|e| DirectionMark::assess(e, significant, sign));
                self.significant.insert(step.name.clone(), Some(significant));
            }
            Err(note) => {
                cell.note = Some(note);
                self.significant.insert(step.name.clone(), None);
            }
        }
        Ok(cell)
    }

    fn gate(&self, step: &Step) -> Option<String> {
        let state = |name: &str| self.significant.get(name).copied().flatten();
        if let Some(g) = &step.when {
            match state(g) {
                Some(true) => {}
                Some(false) => return Some(format!("not run: `{g}` not significant")),
                None => return Some(format!("not run: `{g}` is NA")),
            }
        }
        if let Some(g) = &step.when_not {
            match state(g) {
                Some(false) => {}
                Some(true) => return Some(format!("not run: `{g}` significant")),
                None => return Some(format!("not run: `{g}` is NA")),
            }
        }
        None
    }

    fn correlation(&self, bias: Option<&BiasTable>, cell: &mut StatCell) -> std::result::Result<i8, String> {
        let table = bias.ok_or("correlation needs per-verb bias data")?;
        let r = correlation_across_bias(table).map_err(|e| e.to_string())?;
        cell.statistic = Some(r.r);
        cell.estimate = Some(r.r);
        cell.df = Some(r.df as u32);
        cell.p_value = Some(r.p_value);
        Ok(sign(r.r))
    }

    fn fit(&mut self, subset: &str, frame: &ModelFrame, spec: &ModelSpec) -> std::result::Result<FitResult, String> {
        let key = (subset.to_string(), spec.to_string());
        self.cache
            .entry(key)
            .or_insert_with(|| fit_model(spec, frame, &self.a.options.glmm).map_err(|e| e.to_string()))
            .clone()
    }

    fn compare(&mut self, step: &Step, cell: &mut StatCell) -> std::result::Result<i8, String> {
        let (full_spec, reduced_spec) = step
            .specs()
            .map_err(|e| e.to_string())?
            .ok_or("step has no formulas")?;
        let frame = if step.subset.is_empty() {
            self.frame.clone()
        } else {
            let mut mask = vec![true; self.frame.len()];
            for (col, level) in &step.subset {
                let m = self.frame.level_mask(col, level).map_err(|e| e.to_string())?;
                mask.iter_mut().zip(m).for_each(|(k, v)| *k &= v);
            }
            self.frame.subset(&mask).map_err(|e| e.to_string())?
        };
        if frame.is_empty() {
            return Err("empty subset".into());
        }
        let full = self.fit(&cell.subset, &frame, &full_spec)?;
        let reduced = self.fit(&cell.subset, &frame, &reduced_spec)?;
        self.fits.push(StepFits {
            step: step.name.clone(),
            subset: cell.subset.clone(),
            full: full.clone(),
            reduced: reduced.clone(),
        });
        let test = lrt(&full, &reduced).map_err(|e| e.to_string())?;
        cell.df = Some(test.df);
        cell.p_value = Some(test.p_value);
        match step.kind {
            StepKind::Intercept => {
                let beta = full.coefficients.get(INTERCEPT).ok_or("full model has no intercept")?;
                let z = full.z_values.get(INTERCEPT).filter(|z| z.is_finite()).ok_or("intercept z undefined")?;
                cell.statistic = Some(z);
                cell.estimate = Some(beta);
                cell.p_one_tailed = Some(if beta > 0.0 {
                    test.p_value / 2.0
                } else {
                    1.0 - test.p_value / 2.0
                });
                Ok(sign(beta))
            }
            _ => {
                cell.statistic = Some(test.chi_square);
                cell.estimate = full
                    .coefficients
                    .iter()
                    .find(|(n, _)| reduced.coefficients.get(n).is_none())
                    .map(|(_, b)| b);
                Ok(test.direction_of_effect)
            }
        }
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Descriptive proportions that sit next to the human anchors.
fn descriptive_cells(a: &Analysis<'_>, experiment: Experiment, rows: &[(&PromptRecord, &AnnotationRecord)]) -> Vec<StatCell> {
    let share = |class: VerbClass, bias: Option<BiasType>, hit: &dyn Fn(&AnnotationRecord) -> bool| {
        let sel: Vec<&AnnotationRecord> = rows
            .iter()
            .filter(|(p, _)| p.verb.verb_class == class && (bias.is_none() || p.cell.bias_type == bias))
            .map(|(_, r)| *r)
            .collect();
        (!sel.is_empty()).then(|| sel.iter().filter(|r| hit(r)).count() as f64 / sel.len() as f64)
    };
    let specs: Vec<(&str, &str, &str, Option<f64>)> = match experiment {
        Experiment::E1 => vec![
            (
                "se_icons_object_share",
                "verb_class=SE;bias_type=icons",
                "e1.anchor.se_icons_object",
                share(VerbClass::StimulusExperiencer, Some(BiasType::ICons), &|r| r.coref_target == CorefTarget::Object),
            ),
            (
                "es_icons_subject_share",
                "verb_class=ES;bias_type=icons",
                "e1.anchor.es_icons_subject",
                share(VerbClass::ExperiencerStimulus, Some(BiasType::ICons), &|r| r.coref_target == CorefTarget::Subject),
            ),
        ],
        Experiment::E2 => vec![
            (
                "explanation_share",
                "verb_class=SE",
                "e2.explanation.se",
                share(VerbClass::StimulusExperiencer, None, &|r| r.relation == RelationLabel::Explanation),
            ),
            (
                "explanation_share",
                "verb_class=ES",
                "e2.explanation.es",
                share(VerbClass::ExperiencerStimulus, None, &|r| r.relation == RelationLabel::Explanation),
            ),
        ],
        Experiment::E3 | Experiment::E4 => Vec::new(),
    };
    specs
        .into_iter()
        .map(|(step, subset, key, value)| {
            let mut cell = StatCell::blank(step, subset, "proportion");
            cell.statistic = value;
            cell.estimate = value;
            cell.reference = Some(key.to_string());
            cell.reference_value = a.reference.get(key).and_then(|r| r.value);
            if value.is_none() {
                cell.note = Some("empty subset".into());
            }
            cell
        })
        .collect()
}

fn label<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

fn counts(groups: BTreeMap<(VerbClass, Option<Focus>), BTreeMap<String, usize>>) -> Vec<CountRow> {
    let mut out = Vec::new();
    for ((verb_class, focus), cats) in groups {
        let n: usize = cats.values().sum();
        for (category, count) in cats {
            out.push(CountRow {
                verb_class,
                focus,
                category,
                count,
                proportion: count as f64 / n as f64,
            });
        }
    }
    out
}

/// Relation distribution over all parseable non-relative continuations.
fn relation_counts(records: &[AnnotationRecord], by_id: &HashMap<&str, &PromptRecord>) -> Vec<CountRow> {
    let mut groups: BTreeMap<(VerbClass, Option<Focus>), BTreeMap<String, usize>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.parseable && r.clause_type != ClauseType::Relative) {
        let p = by_id[r.prompt_id.as_str()];
        let g = groups.entry((p.verb.verb_class, None)).or_default();
        for rel in RelationLabel::ALL {
            g.entry(label(&rel)).or_insert(0);
        }
        *g.entry(label(&r.relation)).or_insert(0) += 1;
    }
    counts(groups)
}

fn form_counts(rows: &[(&PromptRecord, &AnnotationRecord)]) -> Vec<CountRow> {
    let mut groups: BTreeMap<(VerbClass, Option<Focus>), BTreeMap<String, usize>> = BTreeMap::new();
    for (p, r) in rows {
        let g = groups.entry((p.verb.verb_class, p.cell.focus)).or_default();
        for f in [AnaphorForm::PersonalPronoun, AnaphorForm::Demonstrative, AnaphorForm::ProperName] {
            g.entry(label(&f)).or_insert(0);
        }
        *g.entry(label(&r.anaphor_form)).or_insert(0) += 1;
    }
    counts(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marks() {
        use DirectionMark::*;
        use Expectation::*;
        assert_eq!(DirectionMark::assess(Positive, true, 1), TowardHuman);
        assert_eq!(DirectionMark::assess(Positive, true, -1), AgainstHuman);
        assert_eq!(DirectionMark::assess(Negative, true, -1), TowardHuman);
        assert_eq!(DirectionMark::assess(Negative, false, -1), NoEffect);
        assert_eq!(DirectionMark::assess(Positive, false, 1), NoEffect);
        assert_eq!(DirectionMark::assess(Null, false, 1), TowardHuman);
        assert_eq!(DirectionMark::assess(Null, true, -1), AgainstHuman);
    }

    #[test]
    fn star_levels() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.005), "**");
        assert_eq!(stars(0.03), "*");
        assert_eq!(stars(0.05), "");
    }
}
