//! File-based stages for one backend run. Each stage reads only its
//! declared inputs and rewrites its output atomically.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::annotate::{agreement_kappa, Annotator, AnnotationRecord, ConnectiveLexicon, CorefTarget, RelationLabel};
use crate::config::{BackendKind, RunConfig};
use crate::design::{
    build_design, kept_names, load_name_lexicon, load_verb_lexicon, screen_names, write_name_lexicon, Experiment,
    Gender, NameEntry, NameScreen, PromptRecord,
};
use crate::error::{Error, Result};
use crate::genclient::http::{HttpBackend, HttpConfig};
use crate::genclient::replay::ReplayBackend;
use crate::genclient::{Backend, ContinuationRecord, Generator, RetryPolicy, SampleOptions};
use crate::report::{self, Analysis, AnalysisOptions, HumanReference, Recipes, ReportMeta};
use crate::stage::{read_stage, write_atomic, write_stage, Layout, StageHeader, StageKind, SCHEMA_VERSION};
use crate::stats::GlmmOptions;

/// Builds the backend named by the config, or by `spec` when given.
/// `spec` is `replay:<dir>` or `http:<url>`.
pub fn backend_from_config(config: &RunConfig, spec: Option<&str>) -> Result<Box<dyn Backend>> {
    if let Some(spec) = spec {
        if let Some(dir) = spec.strip_prefix("replay:") {
            return Ok(Box::new(ReplayBackend::new(dir)?));
        }
        if let Some(url) = spec.strip_prefix("http:").filter(|u| u.starts_with("//")) {
            let mut c = http_config(config);
            c.endpoint = format!("http:{url}");
            return Ok(Box::new(HttpBackend::new(c)?));
        }
        if spec.starts_with("https://") {
            let mut c = http_config(config);
            c.endpoint = spec.to_string();
            return Ok(Box::new(HttpBackend::new(c)?));
        }
        return Err(Error::Validation(format!(
            "backend `{spec}` is neither `replay:<dir>` nor an http(s) URL"
        )));
    }
    match config.backend.kind {
        BackendKind::Replay => {
            let dir = config
                .paths
                .replay_dir
                .as_ref()
                .ok_or_else(|| Error::Validation("replay backend needs `paths.replay_dir`".into()))?;
            Ok(Box::new(ReplayBackend::new(dir)?))
        }
        BackendKind::Http => Ok(Box::new(HttpBackend::new(http_config(config))?)),
    }
}

fn http_config(config: &RunConfig) -> HttpConfig {
    let b = &config.backend;
    HttpConfig {
        endpoint: b.endpoint.clone().unwrap_or_default(),
        dialect: b.dialect,
        model: b.model.clone(),
        auth_token: b.auth_token.clone(),
        timeout_secs: b.timeout_secs,
        first_word_mask: b.first_word_mask,
    }
}

/// One hand-labeled continuation of the agreement corpus. Manual labels
/// carry a `gold_` prefix so a line can sit next to annotator output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldItem {
    pub prompt: PromptRecord,
    pub text: String,
    pub gold_coref_target: CorefTarget,
    /// Labeled for comma prompts only.
    #[serde(default)]
    pub gold_relation: Option<RelationLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub prompt_id: String,
    pub text: String,
    pub field: String,
    pub gold: String,
    pub automatic: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub items: usize,
    pub coref_kappa: f64,
    pub relation_items: usize,
    pub relation_kappa: Option<f64>,
    pub disagreements: Vec<Disagreement>,
}

pub fn load_gold(path: &Path) -> Result<Vec<GoldItem>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn label_name<T: Serialize>(x: &T) -> String {
    serde_json::to_value(x)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Cohen's kappa of the automatic labels against `gold`: coreference over
/// every item, relations over the items that carry a gold relation.
pub fn agreement(annotator: &Annotator, gold: &[GoldItem]) -> Result<AgreementReport> {
    let mut auto_coref = Vec::with_capacity(gold.len());
    let mut gold_coref = Vec::with_capacity(gold.len());
    let mut auto_rel = Vec::new();
    let mut gold_rel = Vec::new();
    let mut disagreements = Vec::new();
    for item in gold {
        let (labels, _) = annotator.label(&item.prompt, &item.text);
        let mut note = |field: &str, g: String, a: String| {
            if g != a {
                disagreements.push(Disagreement {
                    prompt_id: item.prompt.id.clone(),
                    text: item.text.clone(),
                    field: field.to_string(),
                    gold: g,
                    automatic: a,
                });
            }
        };
        note("coref_target", label_name(&item.gold_coref_target), label_name(&labels.coref_target));
        auto_coref.push(labels.coref_target);
        gold_coref.push(item.gold_coref_target);
        if let Some(rel) = item.gold_relation {
            note("relation", label_name(&rel), label_name(&labels.relation));
            auto_rel.push(labels.relation);
            gold_rel.push(rel);
        }
    }
    Ok(AgreementReport {
        items: gold.len(),
        coref_kappa: agreement_kappa(&gold_coref, &auto_coref)?,
        relation_items: gold_rel.len(),
        relation_kappa: if gold_rel.is_empty() {
            None
        } else {
            Some(agreement_kappa(&gold_rel, &auto_rel)?)
        },
        disagreements,
    })
}

pub struct Pipeline {
    pub config: RunConfig,
    pub layout: Layout,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Self {
        let layout = Layout::new(config.paths.output_dir.clone(), &config.model_id);
        Pipeline { config, layout }
    }

    fn header(&self, kind: StageKind, experiment: Experiment, records: usize) -> StageHeader {
        StageHeader {
            schema_version: SCHEMA_VERSION,
            kind,
            experiment,
            model_id: self.config.model_id.clone(),
            seeds: self.config.seeds,
            config_hash: self.config.hash(),
            records,
        }
    }

    fn lexicon(&self) -> Result<ConnectiveLexicon> {
        match &self.config.paths.connectives {
            Some(p) => ConnectiveLexicon::load(p),
            None => Ok(ConnectiveLexicon::german()),
        }
    }

    fn base_names(&self) -> Result<Vec<NameEntry>> {
        load_name_lexicon(&self.config.paths.names)
    }

    /// Screened names when screening is enabled, the raw lexicon otherwise.
    pub fn design_names(&self) -> Result<Vec<NameEntry>> {
        if !self.config.screening.enabled {
            return self.base_names();
        }
        let path = self.layout.names();
        if !path.exists() {
            return Err(Error::MissingStage {
                stage: "screen-names".into(),
                path,
            });
        }
        load_name_lexicon(&path)
    }

    pub fn annotator(&self) -> Result<Annotator> {
        Ok(Annotator::new(self.lexicon()?, &self.base_names()?))
    }

    fn generator<'b>(&self, backend: &'b dyn Backend) -> Generator<'b> {
        Generator::new(backend)
            .with_concurrency(self.config.backend.concurrency)
            .with_retry(RetryPolicy {
                attempts: self.config.backend.retry_attempts,
                base_delay: Duration::from_millis(self.config.backend.retry_base_ms),
            })
    }

    pub fn design(&self, experiment: Experiment) -> Result<PathBuf> {
        let verbs = load_verb_lexicon(&self.config.paths.verbs)?;
        let names = self.design_names()?;
        let records = build_design(experiment, &verbs, &names, self.config.seeds.pairing)?;
        let path = self.layout.stage(experiment, StageKind::Design);
        write_stage(&path, &self.header(StageKind::Design, experiment, records.len()), &records)?;
        Ok(path)
    }

    /// Screens the base lexicon, balances the genders by dropping surplus
    /// names from the end of the larger list, and writes the survivors.
    pub fn screen_names(&self, backend: &dyn Backend) -> Result<Vec<NameScreen>> {
        let candidates = self.base_names()?;
        let screens = screen_names(
            &candidates,
            &self.generator(backend),
            &self.config.screening.options,
            &self.config.decode_config(),
        )?;
        let kept = kept_names(&screens);
        let fem: Vec<&NameEntry> = kept.iter().filter(|n| n.gender == Gender::Feminine).collect();
        let masc: Vec<&NameEntry> = kept.iter().filter(|n| n.gender == Gender::Masculine).collect();
        let n = fem.len().min(masc.len());
        if n == 0 {
            return Err(Error::Validation("name screening left no usable feminine/masculine pair".into()));
        }
        let balanced: Vec<NameEntry> = kept
            .iter()
            .filter(|e| {
                let list = if e.gender == Gender::Feminine { &fem } else { &masc };
                list.iter().position(|x| x.name == e.name).is_some_and(|i| i < n)
            })
            .cloned()
            .collect();
        let path = self.layout.names();
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        write_name_lexicon(&path, &balanced)?;
        let mut json = serde_json::to_string_pretty(&screens)?;
        json.push('\n');
        write_atomic(&self.layout.screening(), json.as_bytes())?;
        Ok(screens)
    }

    pub fn read_design(&self, experiment: Experiment) -> Result<Vec<PromptRecord>> {
        let (_, records) = read_stage(&self.layout.stage(experiment, StageKind::Design), StageKind::Design)?;
        Ok(records)
    }

    pub fn generate(&self, experiment: Experiment, backend: &dyn Backend) -> Result<PathBuf> {
        let prompts = self.read_design(experiment)?;
        let generator = self.generator(backend);
        let mut decode = self.config.decode_config();
        let s = &self.config.sampling;
        let records = if experiment.is_forced_reference() {
            decode.n_return = 1;
            generator.sample_until(
                &prompts,
                s.target_per_cell,
                &SampleOptions {
                    batch_per_cell: s.batch_per_cell,
                    max_rounds: s.max_rounds,
                },
                &decode,
            )?
        } else {
            decode.n_return = decode.n_return.max(s.keep);
            generator.generate_design(&prompts, &decode, s.keep)?
        };
        let path = self.layout.stage(experiment, StageKind::Continuations);
        write_stage(&path, &self.header(StageKind::Continuations, experiment, records.len()), &records)?;
        Ok(path)
    }

    pub fn annotate(&self, experiment: Experiment) -> Result<PathBuf> {
        let prompts = self.read_design(experiment)?;
        let (_, continuations): (_, Vec<ContinuationRecord>) = read_stage(
            &self.layout.stage(experiment, StageKind::Continuations),
            StageKind::Continuations,
        )?;
        let annotator = self.annotator()?;
        let by_id: HashMap<&str, &PromptRecord> = prompts.iter().map(|p| (p.id.as_str(), p)).collect();
        let records = continuations
            .iter()
            .map(|c| {
                let p = by_id
                    .get(c.prompt_id.as_str())
                    .ok_or_else(|| Error::Validation(format!("continuation for unknown prompt `{}`", c.prompt_id)))?;
                Ok(annotator.annotate(p, c))
            })
            .collect::<Result<Vec<AnnotationRecord>>>()?;
        let path = self.layout.stage(experiment, StageKind::Annotations);
        write_stage(&path, &self.header(StageKind::Annotations, experiment, records.len()), &records)?;
        Ok(path)
    }

    /// Agreement of the annotator with a gold corpus; written next to the
    /// stages as `agreement.json`.
    pub fn agree(&self, gold: Option<&Path>) -> Result<AgreementReport> {
        let path = gold
            .map(Path::to_path_buf)
            .or_else(|| self.config.paths.gold.clone())
            .ok_or_else(|| Error::Validation("no gold corpus given".into()))?;
        let report = agreement(&self.annotator()?, &load_gold(&path)?)?;
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        write_atomic(&self.layout.agreement(), json.as_bytes())?;
        Ok(report)
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        let a = &self.config.analysis;
        AnalysisOptions {
            alpha: a.alpha,
            bootstrap_resamples: a.bootstrap_resamples,
            bootstrap_seed: self.config.seeds.bootstrap,
            glmm: GlmmOptions {
                tolerance: a.tolerance,
                max_inner: a.max_inner,
                max_outer: a.max_outer,
                ..GlmmOptions::default()
            },
        }
    }

    pub fn analyze(&self, experiment: Experiment) -> Result<PathBuf> {
        let prompts = self.read_design(experiment)?;
        let (_, annotations): (_, Vec<AnnotationRecord>) = read_stage(
            &self.layout.stage(experiment, StageKind::Annotations),
            StageKind::Annotations,
        )?;
        let recipes = match &self.config.paths.recipes {
            Some(p) => Recipes::load(p)?,
            None => Recipes::bundled(),
        };
        let reference = match &self.config.paths.human_reference {
            Some(p) => HumanReference::load(p)?,
            None => HumanReference::bundled(),
        };
        let options = self.analysis_options();
        let analysis = Analysis {
            recipes: &recipes,
            reference: &reference,
            options: &options,
        };
        let report = report::run_experiment(&analysis, experiment, &prompts, &annotations)?;
        let meta = ReportMeta {
            model_id: self.config.model_id.clone(),
            seeds: self.config.seeds,
            config_hash: self.config.hash(),
        };
        report::emit(&report, &meta, &self.layout.reports())
    }

    /// Every stage for every configured experiment, screening first when
    /// enabled. Returns the report directories.
    pub fn run_all(&self, backend: &dyn Backend) -> Result<Vec<PathBuf>> {
        if self.config.screening.enabled {
            self.screen_names(backend)?;
        }
        let mut dirs = Vec::new();
        for &e in &self.config.experiments {
            self.design(e)?;
            self.generate(e, backend)?;
            self.annotate(e)?;
            dirs.push(self.analyze(e)?);
        }
        if self.config.paths.gold.is_some() {
            self.agree(None)?;
        }
        Ok(dirs)
    }
}
