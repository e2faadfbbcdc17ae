//! Factorial item designs for the four continuation experiments.
//!
//! A design is the full cross of verbs, condition cells and name pairs. Every
//! record is rendered to the German prompt that is sent verbatim to a
//! generation backend.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Experiment {
    E1,
    E2,
    E3,
    E4,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Experiment::E1, Experiment::E2, Experiment::E3, Experiment::E4];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::E1 => "E1",
            Experiment::E2 => "E2",
            Experiment::E3 => "E3",
            Experiment::E4 => "E4",
        }
    }

    /// Experiments 3 and 4 force the first referring expression.
    pub fn is_forced_reference(self) -> bool {
        matches!(self, Experiment::E3 | Experiment::E4)
    }

    /// All condition cells of one verb, in canonical order.
    pub fn cells(self) -> Vec<ConditionCell> {
        let orders = [GenderOrder::FemSubjMascObj, GenderOrder::MascSubjFemObj];
        match self {
            Experiment::E1 => [BiasType::ICaus, BiasType::ICons]
                .into_iter()
                .flat_map(|bias| {
                    orders.into_iter().map(move |gender_order| ConditionCell {
                        bias_type: Some(bias),
                        gender_order,
                        focus: None,
                    })
                })
                .collect(),
            Experiment::E2 => orders
                .into_iter()
                .map(|gender_order| ConditionCell {
                    bias_type: None,
                    gender_order,
                    focus: None,
                })
                .collect(),
            Experiment::E3 | Experiment::E4 => {
                let bias = if self == Experiment::E3 {
                    BiasType::ICaus
                } else {
                    BiasType::ICons
                };
                orders
                    .into_iter()
                    .flat_map(|gender_order| {
                        [Focus::Subject, Focus::Object]
                            .into_iter()
                            .map(move |focus| ConditionCell {
                                bias_type: Some(bias),
                                gender_order,
                                focus: Some(focus),
                            })
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E1" | "1" => Ok(Experiment::E1),
            "E2" | "2" => Ok(Experiment::E2),
            "E3" | "3" => Ok(Experiment::E3),
            "E4" | "4" => Ok(Experiment::E4),
            other => Err(Error::Validation(format!("unknown experiment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VerbClass {
    #[serde(rename = "SE")]
    StimulusExperiencer,
    #[serde(rename = "ES")]
    ExperiencerStimulus,
}

impl VerbClass {
    pub fn code(self) -> &'static str {
        match self {
            VerbClass::StimulusExperiencer => "SE",
            VerbClass::ExperiencerStimulus => "ES",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbEntry {
    pub lemma: String,
    pub past_3sg: String,
    pub verb_class: VerbClass,
    /// Experiments the verb takes part in. Lexicon lines without an explicit
    /// list join every experiment.
    #[serde(default = "all_experiments", skip_serializing_if = "is_all")]
    pub experiments: Vec<Experiment>,
}

fn all_experiments() -> Vec<Experiment> {
    Experiment::ALL.to_vec()
}

fn is_all(e: &[Experiment]) -> bool {
    e == Experiment::ALL
}

impl VerbEntry {
    pub fn new(lemma: &str, past_3sg: &str, verb_class: VerbClass) -> Self {
        VerbEntry {
            lemma: lemma.to_string(),
            past_3sg: past_3sg.to_string(),
            verb_class,
            experiments: all_experiments(),
        }
    }

    pub fn in_experiment(&self, experiment: Experiment) -> bool {
        self.experiments.contains(&experiment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "F")]
    Feminine,
    #[serde(rename = "M")]
    Masculine,
}

impl Gender {
    pub fn code(self) -> &'static str {
        match self {
            Gender::Feminine => "F",
            Gender::Masculine => "M",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NameEntry {
    pub name: String,
    pub gender: Gender,
}

impl NameEntry {
    pub fn new(name: &str, gender: Gender) -> Self {
        NameEntry {
            name: name.to_string(),
            gender,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BiasType {
    ICaus,
    ICons,
}

impl BiasType {
    pub fn code(self) -> &'static str {
        match self {
            BiasType::ICaus => "icaus",
            BiasType::ICons => "icons",
        }
    }

    pub fn connective(self) -> &'static str {
        match self {
            BiasType::ICaus => "weil",
            BiasType::ICons => "sodass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GenderOrder {
    #[serde(rename = "FemSubj_MascObj")]
    FemSubjMascObj,
    #[serde(rename = "MascSubj_FemObj")]
    MascSubjFemObj,
}

impl GenderOrder {
    pub fn subject_gender(self) -> Gender {
        match self {
            GenderOrder::FemSubjMascObj => Gender::Feminine,
            GenderOrder::MascSubjFemObj => Gender::Masculine,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            GenderOrder::FemSubjMascObj => "fm",
            GenderOrder::MascSubjFemObj => "mf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Focus {
    Subject,
    Object,
}

impl Focus {
    pub fn code(self) -> &'static str {
        match self {
            Focus::Subject => "subj",
            Focus::Object => "obj",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConditionCell {
    pub bias_type: Option<BiasType>,
    pub gender_order: GenderOrder,
    pub focus: Option<Focus>,
}

impl ConditionCell {
    /// Compact stable code, e.g. `icaus-fm` or `icons-mf-obj`.
    pub fn code(&self) -> String {
        let mut parts = Vec::with_capacity(3);
        parts.push(self.bias_type.map_or("comma", BiasType::code));
        parts.push(self.gender_order.code());
        if let Some(f) = self.focus {
            parts.push(f.code());
        }
        parts.join("-")
    }

    fn validate_for(&self, experiment: Experiment) -> Result<()> {
        let wants_focus = experiment.is_forced_reference();
        if self.focus.is_some() != wants_focus {
            return Err(Error::Validation(format!(
                "cell {} has focus {:?} which is invalid for {experiment}",
                self.code(),
                self.focus
            )));
        }
        if self.bias_type.is_none() != (experiment == Experiment::E2) {
            return Err(Error::Validation(format!(
                "cell {} has bias type {:?} which is invalid for {experiment}",
                self.code(),
                self.bias_type
            )));
        }
        Ok(())
    }
}

/// One experimental item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PromptRow", try_from = "PromptRow")]
pub struct PromptRecord {
    pub id: String,
    pub experiment: Experiment,
    pub verb: VerbEntry,
    pub cell: ConditionCell,
    pub subject_name: NameEntry,
    pub object_name: NameEntry,
    pub prompt_text: String,
}

impl PromptRecord {
    pub fn new(
        experiment: Experiment,
        verb: VerbEntry,
        cell: ConditionCell,
        subject_name: NameEntry,
        object_name: NameEntry,
    ) -> Result<Self> {
        cell.validate_for(experiment)?;
        if subject_name.gender == object_name.gender {
            return Err(Error::Validation(format!(
                "{} and {} share a gender",
                subject_name.name, object_name.name
            )));
        }
        if subject_name.gender != cell.gender_order.subject_gender() {
            return Err(Error::Validation(format!(
                "subject {} does not match gender order {}",
                subject_name.name,
                cell.gender_order.code()
            )));
        }
        let id = record_id(experiment, &verb, &cell, &subject_name, &object_name);
        let mut record = PromptRecord {
            id,
            experiment,
            verb,
            cell,
            subject_name,
            object_name,
            prompt_text: String::new(),
        };
        record.prompt_text = render_prompt(&record);
        Ok(record)
    }

    pub fn connective(&self) -> Option<&'static str> {
        self.cell.bias_type.map(BiasType::connective)
    }

    /// Name of the referent the continuation is forced to mention first.
    pub fn focused_name(&self) -> Option<&NameEntry> {
        match self.cell.focus? {
            Focus::Subject => Some(&self.subject_name),
            Focus::Object => Some(&self.object_name),
        }
    }
}

fn record_id(
    experiment: Experiment,
    verb: &VerbEntry,
    cell: &ConditionCell,
    subject: &NameEntry,
    object: &NameEntry,
) -> String {
    format!(
        "{experiment}-{}-{}-{}-{}",
        verb.lemma,
        cell.code(),
        subject.name,
        object.name
    )
}

/// Flat on-disk form of a [`PromptRecord`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PromptRow {
    id: String,
    experiment: Experiment,
    verb: String,
    past_3sg: String,
    class: VerbClass,
    bias_type: Option<BiasType>,
    gender_order: GenderOrder,
    focus: Option<Focus>,
    subject_name: String,
    object_name: String,
    prompt_text: String,
}

impl From<PromptRecord> for PromptRow {
    fn from(r: PromptRecord) -> Self {
        PromptRow {
            id: r.id,
            experiment: r.experiment,
            verb: r.verb.lemma,
            past_3sg: r.verb.past_3sg,
            class: r.verb.verb_class,
            bias_type: r.cell.bias_type,
            gender_order: r.cell.gender_order,
            focus: r.cell.focus,
            subject_name: r.subject_name.name,
            object_name: r.object_name.name,
            prompt_text: r.prompt_text,
        }
    }
}

impl TryFrom<PromptRow> for PromptRecord {
    type Error = Error;

    fn try_from(row: PromptRow) -> Result<Self> {
        let subject_gender = row.gender_order.subject_gender();
        let object_gender = match subject_gender {
            Gender::Feminine => Gender::Masculine,
            Gender::Masculine => Gender::Feminine,
        };
        let record = PromptRecord::new(
            row.experiment,
            VerbEntry::new(&row.verb, &row.past_3sg, row.class),
            ConditionCell {
                bias_type: row.bias_type,
                gender_order: row.gender_order,
                focus: row.focus,
            },
            NameEntry::new(&row.subject_name, subject_gender),
            NameEntry::new(&row.object_name, object_gender),
        )?;
        if record.id != row.id || record.prompt_text != row.prompt_text {
            return Err(Error::Validation(format!(
                "design record `{}` is inconsistent with its fields",
                row.id
            )));
        }
        Ok(record)
    }
}

/// `<Subj> <past> <Obj>, <connective> ` with exactly one trailing space.
pub fn render_prompt(record: &PromptRecord) -> String {
    let head = format!(
        "{} {} {},",
        record.subject_name.name, record.verb.past_3sg, record.object_name.name
    );
    match record.connective() {
        Some(connective) => format!("{head} {connective} "),
        None => format!("{head} "),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_verb_lexicon(path: impl AsRef<Path>) -> Result<Vec<VerbEntry>> {
    let path = path.as_ref();
    parse_verb_lexicon(&read_to_string(path)?, &path.display().to_string())
}

/// Parses `lemma;past_3sg;SE|ES[;E1,E2,...]` lines. `#` starts a comment; a
/// fourth field of `-` excludes the verb from every experiment.
pub fn parse_verb_lexicon(text: &str, origin: &str) -> Result<Vec<VerbEntry>> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(parse_err(format!(
                "expected 3 or 4 `;`-separated fields, found {}",
                fields.len()
            )));
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(parse_err("empty lemma or past form".into()));
        }
        let verb_class = match fields[2] {
            "SE" => VerbClass::StimulusExperiencer,
            "ES" => VerbClass::ExperiencerStimulus,
            other => return Err(parse_err(format!("unknown verb class `{other}`"))),
        };
        let experiments = match fields.get(3) {
            None | Some(&"") | Some(&"*") => all_experiments(),
            Some(&"-") => Vec::new(),
            Some(list) => {
                let mut exps = list
                    .split(',')
                    .map(|e| e.parse::<Experiment>().map_err(|err| parse_err(err.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                exps.sort();
                exps.dedup();
                exps
            }
        };
        if !seen.insert(fields[0].to_string()) {
            return Err(Error::Validation(format!(
                "{origin}:{}: duplicate lemma `{}`",
                idx + 1,
                fields[0]
            )));
        }
        entries.push(VerbEntry {
            lemma: fields[0].to_string(),
            past_3sg: fields[1].to_string(),
            verb_class,
            experiments,
        });
    }
    Ok(entries)
}

pub fn load_name_lexicon(path: impl AsRef<Path>) -> Result<Vec<NameEntry>> {
    let path = path.as_ref();
    parse_name_lexicon(&read_to_string(path)?, &path.display().to_string())
}

/// Parses `name;F|M` lines.
pub fn parse_name_lexicon(text: &str, origin: &str) -> Result<Vec<NameEntry>> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        if fields.len() != 2 || fields[0].is_empty() {
            return Err(parse_err("expected `name;F|M`".into()));
        }
        let gender = match fields[1] {
            "F" => Gender::Feminine,
            "M" => Gender::Masculine,
            other => return Err(parse_err(format!("unknown gender `{other}`"))),
        };
        if !seen.insert(fields[0].to_string()) {
            return Err(Error::Validation(format!(
                "{origin}:{}: duplicate name `{}`",
                idx + 1,
                fields[0]
            )));
        }
        entries.push(NameEntry::new(fields[0], gender));
    }
    Ok(entries)
}

pub fn write_name_lexicon(path: impl AsRef<Path>, names: &[NameEntry]) -> Result<()> {
    let path = path.as_ref();
    let body: String = names
        .iter()
        .map(|n| format!("{};{}\n", n.name, n.gender.code()))
        .collect();
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// A fixed feminine/masculine pairing used across all cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamePair {
    pub feminine: NameEntry,
    pub masculine: NameEntry,
}

impl NamePair {
    pub fn ordered(&self, order: GenderOrder) -> (&NameEntry, &NameEntry) {
        match order {
            GenderOrder::FemSubjMascObj => (&self.feminine, &self.masculine),
            GenderOrder::MascSubjFemObj => (&self.masculine, &self.feminine),
        }
    }
}

/// Shuffles the feminine and masculine lists independently with `seed` and
/// zips them into pairs.
pub fn pair_names(names: &[NameEntry], seed: u64) -> Result<Vec<NamePair>> {
    let mut feminine: Vec<NameEntry> = names
        .iter()
        .filter(|n| n.gender == Gender::Feminine)
        .cloned()
        .collect();
    let mut masculine: Vec<NameEntry> = names
        .iter()
        .filter(|n| n.gender == Gender::Masculine)
        .cloned()
        .collect();
    if feminine.len() != masculine.len() {
        return Err(Error::Validation(format!(
            "name lexicon is unbalanced: {} feminine vs {} masculine",
            feminine.len(),
            masculine.len()
        )));
    }
    if feminine.is_empty() {
        return Err(Error::Validation("name lexicon is empty".into()));
    }
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.name.as_str()) {
            return Err(Error::Validation(format!("duplicate name `{}`", n.name)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    feminine.shuffle(&mut rng);
    masculine.shuffle(&mut rng);
    Ok(feminine
        .into_iter()
        .zip(masculine)
        .map(|(feminine, masculine)| NamePair {
            feminine,
            masculine,
        })
        .collect())
}

/// Full factorial design: every participating verb × every cell of the
/// experiment × every name pair.
pub fn build_design(
    experiment: Experiment,
    verbs: &[VerbEntry],
    names: &[NameEntry],
    pairing_seed: u64,
) -> Result<Vec<PromptRecord>> {
    build_design_with_cells(experiment, verbs, names, &experiment.cells(), pairing_seed)
}

pub fn build_design_with_cells(
    experiment: Experiment,
    verbs: &[VerbEntry],
    names: &[NameEntry],
    cells: &[ConditionCell],
    pairing_seed: u64,
) -> Result<Vec<PromptRecord>> {
    let verbs: Vec<&VerbEntry> = verbs.iter().filter(|v| v.in_experiment(experiment)).collect();
    if verbs.is_empty() {
        return Err(Error::Validation(format!("no verbs take part in {experiment}")));
    }
    let pairs = pair_names(names, pairing_seed)?;
    let mut records = Vec::with_capacity(verbs.len() * cells.len() * pairs.len());
    for verb in verbs {
        for cell in cells {
            for pair in &pairs {
                let (subject, object) = pair.ordered(cell.gender_order);
                records.push(PromptRecord::new(
                    experiment,
                    verb.clone(),
                    *cell,
                    subject.clone(),
                    object.clone(),
                )?);
            }
        }
    }
    Ok(records)
}

/// Screening outcome for one candidate name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameScreen {
    pub name: String,
    pub gender: Gender,
    pub incongruent: usize,
    pub annotatable: usize,
    pub kept: bool,
}

impl NameScreen {
    pub fn rate(&self) -> Option<f64> {
        (self.annotatable > 0).then(|| self.incongruent as f64 / self.annotatable as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreeningOptions {
    /// Intransitive prompt with a `{name}` placeholder.
    pub template: String,
    pub n_per_name: usize,
    /// Names at or above this incongruence rate are dropped.
    pub threshold: f64,
}

impl Default for ScreeningOptions {
    fn default() -> Self {
        ScreeningOptions {
            template: "{name} lachte, weil ".to_string(),
            n_per_name: 20,
            threshold: 0.05,
        }
    }
}

/// Drops names whose continuations refer back with a pronoun of the wrong
/// gender too often. Each name gets `n_per_name` requests with consecutive
/// seeds; the first subject pronoun or demonstrative of each continuation
/// is checked against the name's gender.
pub fn screen_names(
    candidates: &[NameEntry],
    generator: &crate::genclient::Generator<'_>,
    options: &ScreeningOptions,
    decode: &crate::genclient::DecodeConfig,
) -> Result<Vec<NameScreen>> {
    use crate::annotate::{AnaphorForm, Annotator, CorefTarget, GenderContext};

    if !(options.threshold > 0.0 && options.threshold <= 1.0) {
        return Err(Error::Validation(format!("threshold {} outside (0, 1]", options.threshold)));
    }
    if options.n_per_name == 0 {
        return Err(Error::Validation("n_per_name must be at least 1".into()));
    }
    if !options.template.contains("{name}") {
        return Err(Error::Validation("screening template lacks `{name}`".into()));
    }
    let annotator = Annotator::default();
    let connective = options.template.split_whitespace().last().filter(|w| w.chars().all(char::is_alphabetic));
    let mut out = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let prompt = options.template.replace("{name}", &cand.name);
        let ctx = GenderContext::for_screening(cand);
        let (mut incongruent, mut annotatable) = (0, 0);
        for k in 0..options.n_per_name {
            let mut d = decode.clone();
            d.n_return = 1;
            d.seed = decode.seed.wrapping_add(k as u64);
            let records = generator.generate(&cand.name, &prompt, &d)?;
            let Some(r) = records.first() else { continue };
            let (labels, _) = annotator.label_with(Experiment::E1, connective, &ctx, &r.text);
            let pronominal = matches!(labels.anaphor_form, AnaphorForm::PersonalPronoun | AnaphorForm::Demonstrative);
            match labels.coref_target {
                CorefTarget::Subject if pronominal => annotatable += 1,
                CorefTarget::Object if pronominal => {
                    annotatable += 1;
                    incongruent += 1;
                }
                _ => {}
            }
        }
        let kept = if annotatable == 0 {
            tracing::warn!(name = %cand.name, "no annotatable continuations; name excluded");
            false
        } else {
            (incongruent as f64 / annotatable as f64) < options.threshold
        };
        out.push(NameScreen {
            name: cand.name.clone(),
            gender: cand.gender,
            incongruent,
            annotatable,
            kept,
        });
    }
    Ok(out)
}

/// Names that passed screening, in input order.
pub fn kept_names(screens: &[NameScreen]) -> Vec<NameEntry> {
    screens.iter().filter(|s| s.kept).map(|s| NameEntry::new(&s.name, s.gender)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verbs(n_per_class: usize) -> Vec<VerbEntry> {
        (0..n_per_class)
            .flat_map(|i| {
                [
                    VerbEntry::new(&format!("se{i}"), &format!("se{i}te"), VerbClass::StimulusExperiencer),
                    VerbEntry::new(&format!("es{i}"), &format!("es{i}te"), VerbClass::ExperiencerStimulus),
                ]
            })
            .collect()
    }

    fn names(n_per_gender: usize) -> Vec<NameEntry> {
        (0..n_per_gender)
            .flat_map(|i| {
                [
                    NameEntry::new(&format!("Frau{i}"), Gender::Feminine),
                    NameEntry::new(&format!("Herr{i}"), Gender::Masculine),
                ]
            })
            .collect()
    }

    #[test]
    fn parses_verb_lines() {
        let v = parse_verb_lexicon("faszinieren;faszinierte;SE\n", "t").unwrap();
        assert_eq!(v, vec![VerbEntry::new("faszinieren", "faszinierte", VerbClass::StimulusExperiencer)]);
        let v = parse_verb_lexicon("# comment\nbewundern;bewunderte;ES\n", "t").unwrap();
        assert_eq!(v[0].verb_class, VerbClass::ExperiencerStimulus);
    }

    #[test]
    fn verb_inclusion_flags() {
        let v = parse_verb_lexicon("belustigen;belustigte;SE;E2\nx;y;ES;-\n", "t").unwrap();
        assert!(v[0].in_experiment(Experiment::E2));
        assert!(!v[0].in_experiment(Experiment::E1));
        assert!(v[1].experiments.is_empty());
    }

    #[test]
    fn duplicate_lemma_rejected() {
        let err = parse_verb_lexicon(
            "faszinieren;faszinierte;SE\nfaszinieren;faszinierte;SE\n",
            "t",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_verb_lexicon("a;b;SE\n\nbroken line\n", "verbs.txt").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        assert!(parse_verb_lexicon("a;b;XX\n", "t").is_err());
    }

    #[test]
    fn renders_prompts() {
        let maria = NameEntry::new("Maria", Gender::Feminine);
        let peter = NameEntry::new("Peter", Gender::Masculine);
        let fasz = VerbEntry::new("faszinieren", "faszinierte", VerbClass::StimulusExperiencer);
        let cell = ConditionCell {
            bias_type: Some(BiasType::ICaus),
            gender_order: GenderOrder::FemSubjMascObj,
            focus: None,
        };
        let r = PromptRecord::new(Experiment::E1, fasz.clone(), cell, maria.clone(), peter.clone()).unwrap();
        assert_eq!(r.prompt_text, "Maria faszinierte Peter, weil ");

        let karl = NameEntry::new("Karl", Gender::Masculine);
        let emma = NameEntry::new("Emma", Gender::Feminine);
        let bew = VerbEntry::new("bewundern", "bewunderte", VerbClass::ExperiencerStimulus);
        let cell = ConditionCell {
            bias_type: Some(BiasType::ICons),
            gender_order: GenderOrder::MascSubjFemObj,
            focus: None,
        };
        let r = PromptRecord::new(Experiment::E1, bew, cell, karl, emma).unwrap();
        assert_eq!(r.prompt_text, "Karl bewunderte Emma, sodass ");

        let cell = ConditionCell {
            bias_type: None,
            gender_order: GenderOrder::FemSubjMascObj,
            focus: None,
        };
        let r = PromptRecord::new(Experiment::E2, fasz, cell, maria, peter).unwrap();
        assert_eq!(r.prompt_text, "Maria faszinierte Peter, ");
        assert_eq!(render_prompt(&r), render_prompt(&r));
    }

    #[test]
    fn design_counts() {
        let v = verbs(19);
        let n = names(40);
        assert_eq!(build_design(Experiment::E1, &v, &n, 7).unwrap().len(), 6080);
        assert_eq!(build_design(Experiment::E2, &v, &n, 7).unwrap().len(), 3040);
        assert_eq!(build_design(Experiment::E3, &v, &n, 7).unwrap().len(), 6080);
    }

    #[test]
    fn unit_design() {
        let v = vec![VerbEntry::new("faszinieren", "faszinierte", VerbClass::StimulusExperiencer)];
        let n = vec![
            NameEntry::new("Maria", Gender::Feminine),
            NameEntry::new("Peter", Gender::Masculine),
        ];
        let cell = Experiment::E1.cells()[0];
        let d = build_design_with_cells(Experiment::E1, &v, &n, &[cell], 1).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].id, "E1-faszinieren-icaus-fm-Maria-Peter");
    }

    #[test]
    fn unbalanced_names_rejected() {
        let mut n = names(3);
        n.push(NameEntry::new("Extra", Gender::Feminine));
        assert!(matches!(
            build_design(Experiment::E1, &verbs(1), &n, 0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn cells_balanced_and_counterbalanced() {
        let d = build_design(Experiment::E1, &verbs(3), &names(5), 11).unwrap();
        for verb in ["se0", "es2"] {
            let rows: Vec<_> = d.iter().filter(|r| r.verb.lemma == verb).collect();
            for cell in Experiment::E1.cells() {
                assert_eq!(rows.iter().filter(|r| r.cell == cell).count(), 5);
            }
            let fm = rows
                .iter()
                .filter(|r| r.cell.gender_order == GenderOrder::FemSubjMascObj)
                .count();
            assert_eq!(fm * 2, rows.len());
        }
        for r in &d {
            assert_ne!(r.subject_name.gender, r.object_name.gender);
            assert_ne!(r.subject_name.name, r.object_name.name);
        }
    }

    #[test]
    fn design_is_deterministic_and_roundtrips() {
        let a = build_design(Experiment::E3, &verbs(2), &names(4), 99).unwrap();
        let b = build_design(Experiment::E3, &verbs(2), &names(4), 99).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let line = serde_json::to_string(&a[3]).unwrap();
        let back: PromptRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, a[3]);
        assert!(line.contains("\"class\":\"SE\"") || line.contains("\"class\":\"ES\""));
    }

    #[test]
    fn pairs_are_fixed_across_cells() {
        let d = build_design(Experiment::E1, &verbs(1), &names(4), 3).unwrap();
        let pairs: HashSet<(String, String)> = d
            .iter()
            .map(|r| {
                let (f, m) = if r.subject_name.gender == Gender::Feminine {
                    (&r.subject_name, &r.object_name)
                } else {
                    (&r.object_name, &r.subject_name)
                };
                (f.name.clone(), m.name.clone())
            })
            .collect();
        assert_eq!(pairs.len(), 4);
    }
}
