//! Rule-based annotation of German continuations.

mod german;
pub mod kappa;
pub mod lexicon;
pub mod rules;
pub mod select;
pub mod tokenize;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::design::{Experiment, Gender, NameEntry, PromptRecord};

pub use kappa::agreement_kappa;
pub use lexicon::{ConnectiveLexicon, ConnectiveLexiconEntry, RelationLabel};
pub use rules::{check_parseable, classify_relation, find_first_anaphor, ClauseAnalysis};
pub use select::{select_for_analysis, ExclusionReason, Selection};
pub use tokenize::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorefTarget {
    Subject,
    Object,
    Both,
    Neither,
    NoAnaphor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnaphorForm {
    PersonalPronoun,
    Demonstrative,
    ProperName,
    Other,
    NoAnaphor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseType {
    Subordinate,
    Main,
    Relative,
    Fragment,
}

/// Object-verb-subject readings of the prompt are not detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OvsReading {
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub prompt_id: String,
    pub rank: usize,
    pub parseable: bool,
    pub coref_target: CorefTarget,
    pub anaphor_form: AnaphorForm,
    pub relation: RelationLabel,
    pub connective: Option<String>,
    pub clause_type: ClauseType,
    #[serde(default)]
    pub ovs_reading: OvsReading,
}

/// Genders and names of the two prompt referents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenderContext {
    pub subject_gender: Gender,
    pub object_gender: Gender,
    pub subject_name: String,
    pub object_name: String,
}

impl GenderContext {
    pub fn from_prompt(prompt: &PromptRecord) -> Self {
        GenderContext {
            subject_gender: prompt.subject_name.gender,
            object_gender: prompt.object_name.gender,
            subject_name: prompt.subject_name.name.clone(),
            object_name: prompt.object_name.name.clone(),
        }
    }

    /// Single-referent context for name screening. The object slot holds an
    /// unnamed referent of the other gender, so an incongruent pronoun lands
    /// on `Object`.
    pub fn for_screening(name: &NameEntry) -> Self {
        let other = match name.gender {
            Gender::Feminine => Gender::Masculine,
            Gender::Masculine => Gender::Feminine,
        };
        GenderContext {
            subject_gender: name.gender,
            object_gender: other,
            subject_name: name.name.clone(),
            object_name: String::new(),
        }
    }

    pub(crate) fn target_for(&self, gender: Gender) -> CorefTarget {
        if gender == self.subject_gender {
            CorefTarget::Subject
        } else if gender == self.object_gender {
            CorefTarget::Object
        } else {
            CorefTarget::Neither
        }
    }

    pub(crate) fn name_target(&self, surface: &str) -> Option<CorefTarget> {
        if !self.subject_name.is_empty() && surface == self.subject_name {
            Some(CorefTarget::Subject)
        } else if !self.object_name.is_empty() && surface == self.object_name {
            Some(CorefTarget::Object)
        } else {
            None
        }
    }
}

/// Labels for one continuation, before joining to ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Labels {
    pub parseable: bool,
    pub coref_target: CorefTarget,
    pub anaphor_form: AnaphorForm,
    pub relation: RelationLabel,
    pub clause_type: ClauseType,
}

#[derive(Debug, Clone)]
pub struct Annotator {
    lexicon: ConnectiveLexicon,
    known_names: HashSet<String>,
}

impl Default for Annotator {
    fn default() -> Self {
        Annotator::new(ConnectiveLexicon::german(), &[])
    }
}

impl Annotator {
    /// `known_names` lets names outside the prompt be recognised as
    /// non-referent proper names instead of generic nouns.
    pub fn new(lexicon: ConnectiveLexicon, known_names: &[NameEntry]) -> Self {
        Annotator {
            lexicon,
            known_names: known_names.iter().map(|n| n.name.clone()).collect(),
        }
    }

    pub fn lexicon(&self) -> &ConnectiveLexicon {
        &self.lexicon
    }

    /// Labels and connective for `text` continuing `prompt`.
    pub fn label(&self, prompt: &PromptRecord, text: &str) -> (Labels, Option<String>) {
        let ctx = GenderContext::from_prompt(prompt);
        self.label_with(prompt.experiment, prompt.connective(), &ctx, text)
    }

    /// Labels for a continuation of a prompt ending in `connective` (or a
    /// comma when `None`), with the referents given by `ctx`.
    pub fn label_with(
        &self,
        experiment: Experiment,
        connective: Option<&str>,
        ctx: &GenderContext,
        text: &str,
    ) -> (Labels, Option<String>) {
        let tokens = tokenize(text);
        let clause = rules::analyze_clause(experiment, &tokens, ctx, &self.lexicon);
        if !clause.parseable {
            let labels = Labels {
                parseable: false,
                coref_target: CorefTarget::NoAnaphor,
                anaphor_form: AnaphorForm::NoAnaphor,
                relation: RelationLabel::None,
                clause_type: ClauseType::Fragment,
            };
            return (labels, None);
        }
        let (target, form, _) = rules::scan_subject(&tokens, &clause, ctx, &self.known_names);
        let (relation, connective) = match connective {
            Some(c) => match self.lexicon.get(c) {
                Some(e) => (e.relation, Some(c.to_string())),
                None => (RelationLabel::None, None),
            },
            None => rules::relation_of(&tokens, &clause, &self.lexicon),
        };
        let labels = Labels {
            parseable: true,
            coref_target: target,
            anaphor_form: form,
            relation,
            clause_type: clause.clause_type,
        };
        (labels, connective)
    }

    pub fn annotate_text(&self, prompt: &PromptRecord, rank: usize, text: &str) -> AnnotationRecord {
        let (l, connective) = self.label(prompt, text);
        AnnotationRecord {
            prompt_id: prompt.id.clone(),
            rank,
            parseable: l.parseable,
            coref_target: l.coref_target,
            anaphor_form: l.anaphor_form,
            relation: l.relation,
            connective,
            clause_type: l.clause_type,
            ovs_reading: OvsReading::Unknown,
        }
    }

    pub fn annotate(&self, prompt: &PromptRecord, continuation: &crate::genclient::ContinuationRecord) -> AnnotationRecord {
        self.annotate_text(prompt, continuation.rank, &continuation.text)
    }
}
