//! Analysis recipes on synthetic annotation sets with known geometry.

use std::path::PathBuf;

use icbench_core::annotate::{AnaphorForm, AnnotationRecord, ClauseType, CorefTarget, OvsReading, RelationLabel};
use icbench_core::design::{
    build_design, load_name_lexicon, load_verb_lexicon, BiasType, Experiment, Focus, NameEntry, PromptRecord, VerbClass,
};
use icbench_core::report::{
    run_experiment, run_experiment1, run_experiment2, run_experiment3, Analysis, AnalysisOptions, DirectionMark,
    ExperimentReport, HumanReference, PlotData, Recipes,
};
use icbench_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(file)
}

/// The first `pairs` women and `pairs` men of the bundled lexicon.
fn names(pairs: usize) -> Vec<NameEntry> {
    let all = load_name_lexicon(data("names.txt")).unwrap();
    let women = all.iter().filter(|n| n.gender == icbench_core::design::Gender::Feminine).take(pairs);
    let men = all.iter().filter(|n| n.gender == icbench_core::design::Gender::Masculine).take(pairs);
    women.chain(men).cloned().collect()
}

fn design(e: Experiment, pairs: usize) -> Vec<PromptRecord> {
    let verbs = load_verb_lexicon(data("verbs.txt")).unwrap();
    build_design(e, &verbs, &names(pairs), 3).unwrap()
}

fn record(p: &PromptRecord, rank: usize, target: CorefTarget, form: AnaphorForm, relation: RelationLabel) -> AnnotationRecord {
    let connective = match relation {
        RelationLabel::None => None,
        RelationLabel::Explanation => Some("weil".to_string()),
        RelationLabel::Temporal => Some("als".to_string()),
        _ => p.connective().map(str::to_string),
    };
    AnnotationRecord {
        prompt_id: p.id.clone(),
        rank,
        parseable: true,
        coref_target: target,
        anaphor_form: form,
        relation,
        connective,
        clause_type: ClauseType::Subordinate,
        ovs_reading: OvsReading::Unknown,
    }
}

fn subject_probability(class: VerbClass, bias: BiasType) -> f64 {
    match (class, bias) {
        (VerbClass::StimulusExperiencer, BiasType::ICaus) => 0.8,
        (VerbClass::StimulusExperiencer, BiasType::ICons) => 0.25,
        (VerbClass::ExperiencerStimulus, BiasType::ICaus) => 0.25,
        (VerbClass::ExperiencerStimulus, BiasType::ICons) => 0.75,
    }
}

/// Coreference annotations with the human crossover: stimulus-experiencer
/// verbs favour the subject after `weil` and the object after `sodass`;
/// experiencer-stimulus verbs the reverse.
fn coreference_annotations(prompts: &[PromptRecord], per_prompt: usize, seed: u64) -> Vec<AnnotationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for p in prompts {
        let pr = subject_probability(p.verb.verb_class, p.cell.bias_type.unwrap());
        for rank in 0..per_prompt {
            let t = if rng.random::<f64>() < pr { CorefTarget::Subject } else { CorefTarget::Object };
            out.push(record(p, rank, t, AnaphorForm::PersonalPronoun, RelationLabel::Explanation));
        }
    }
    out
}

fn analyse(e: Experiment, prompts: &[PromptRecord], records: &[AnnotationRecord]) -> icbench_core::Result<ExperimentReport> {
    with_bundled(|a| run_experiment(a, e, prompts, records))
}

fn with_bundled<T>(f: impl FnOnce(&Analysis<'_>) -> T) -> T {
    let recipes = Recipes::bundled();
    let reference = HumanReference::bundled();
    let options = AnalysisOptions {
        bootstrap_resamples: 200,
        ..AnalysisOptions::default()
    };
    f(&Analysis {
        recipes: &recipes,
        reference: &reference,
        options: &options,
    })
}

#[test]
fn human_like_coreference_is_marked_toward_human() {
    let prompts = design(Experiment::E1, 4);
    let records = coreference_annotations(&prompts, 3, 5);
    let r = with_bundled(|a| run_experiment1(a, &prompts, &records)).unwrap();
    let interaction = r.cell("interaction").unwrap();
    assert!(interaction.p_value.unwrap() < 1e-3, "{interaction:?}");
    assert_eq!(interaction.mark, Some(DirectionMark::TowardHuman));
    for step in ["icaus_verb_class", "icons_verb_class"] {
        let c = r.cell(step).unwrap();
        assert_eq!(c.significant, Some(true), "{c:?}");
        assert_eq!(c.mark, Some(DirectionMark::TowardHuman), "{step}");
    }
    assert!(r.cell("icaus_verb_class").unwrap().estimate.unwrap() > 0.0);
    assert!(r.cell("icons_verb_class").unwrap().estimate.unwrap() < 0.0);
    let corr = r.cell("correlation").unwrap();
    assert!(corr.statistic.unwrap() < -0.8, "{corr:?}");
    assert_eq!(corr.mark, Some(DirectionMark::TowardHuman));
    // unreferenced steps carry no mark
    assert_eq!(r.cell("gender_order").unwrap().mark, None);
    match &r.plot {
        PlotData::Bias(t) => assert_eq!(t.rows.len(), 38 * 2),
        other => panic!("unexpected plot data {other:?}"),
    }
    assert!(r.accounting.closes());
    assert_eq!(r.accounting.total, records.len());
}

#[test]
fn gated_steps_are_na_without_an_interaction() {
    let prompts = design(Experiment::E1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let records: Vec<_> = prompts
        .iter()
        .flat_map(|p| (0..2).map(move |rank| (p, rank)))
        .map(|(p, rank)| {
            let t = if rng.random::<bool>() { CorefTarget::Subject } else { CorefTarget::Object };
            record(p, rank, t, AnaphorForm::PersonalPronoun, RelationLabel::Explanation)
        })
        .collect();
    let r = with_bundled(|a| run_experiment1(a, &prompts, &records)).unwrap();
    let interaction = r.cell("interaction").unwrap();
    assert_eq!(interaction.significant, Some(false), "{interaction:?}");
    assert_eq!(interaction.mark, Some(DirectionMark::NoEffect));
    for step in ["icaus_verb_class", "icons_verb_class"] {
        let c = r.cell(step).unwrap();
        assert!(c.is_na());
        assert!(c.note.as_deref().unwrap().contains("interaction"));
    }
}

#[test]
fn exclusions_close_the_accounting() {
    let prompts = design(Experiment::E1, 2);
    let mut records = coreference_annotations(&prompts, 2, 1);
    for (i, r) in records.iter_mut().enumerate() {
        match i % 7 {
            0 => {
                r.coref_target = CorefTarget::Both;
            }
            1 => {
                r.coref_target = CorefTarget::NoAnaphor;
                r.anaphor_form = AnaphorForm::NoAnaphor;
            }
            _ => {}
        }
    }
    let r = analyse(Experiment::E1, &prompts, &records).unwrap();
    assert!(r.accounting.closes());
    let excluded: usize = r.accounting.excluded.values().sum();
    assert_eq!(r.accounting.total, records.len());
    assert_eq!(r.accounting.included + excluded, records.len());
    assert_eq!(r.exclusions.len(), excluded);
    assert_eq!(r.accounting.excluded["BothNeither"], records.len().div_ceil(7));
}

#[test]
fn annotations_for_unknown_prompts_are_rejected() {
    let prompts = design(Experiment::E1, 2);
    let mut records = coreference_annotations(&prompts, 1, 1);
    records[0].prompt_id = "E1-nothing".into();
    assert!(matches!(analyse(Experiment::E1, &prompts, &records), Err(Error::Validation(_))));
}

#[test]
fn coherence_without_relations_is_an_error() {
    let prompts = design(Experiment::E2, 2);
    let records: Vec<_> = prompts
        .iter()
        .map(|p| {
            let mut r = record(p, 0, CorefTarget::Subject, AnaphorForm::PersonalPronoun, RelationLabel::None);
            r.clause_type = ClauseType::Relative;
            r
        })
        .collect();
    let e = with_bundled(|a| run_experiment2(a, &prompts, &records)).unwrap_err();
    assert!(matches!(e, Error::Validation(_)), "{e}");
}

#[test]
fn explanation_majority_without_class_difference() {
    let prompts = design(Experiment::E2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut records = Vec::new();
    for p in &prompts {
        for rank in 0..3 {
            let rel = if rng.random::<f64>() < 0.8 { RelationLabel::Explanation } else { RelationLabel::Temporal };
            records.push(record(p, rank, CorefTarget::Subject, AnaphorForm::PersonalPronoun, rel));
        }
    }
    let r = with_bundled(|a| run_experiment2(a, &prompts, &records)).unwrap();
    let vc = r.cell("verb_class").unwrap();
    assert_eq!(vc.significant, Some(false), "{vc:?}");
    // a null expectation is met by a non-significant effect
    assert_eq!(vc.mark, Some(DirectionMark::TowardHuman));
    let i = r.cell("intercept").unwrap();
    assert_eq!(i.statistic_name, "z");
    assert!(i.statistic.unwrap() > 3.0, "{i:?}");
    assert!(i.p_one_tailed.unwrap() < 1e-3);
    assert_eq!(i.mark, Some(DirectionMark::TowardHuman));
    assert!(r.cell("intercept_se").unwrap().is_na());
    match &r.plot {
        PlotData::Relations(rows) => {
            let explanation: usize = rows.iter().filter(|c| c.category == "explanation").map(|c| c.count).sum();
            let total: usize = rows.iter().map(|c| c.count).sum();
            assert_eq!(total, records.len());
            assert!((explanation as f64 / total as f64 - 0.8).abs() < 0.05);
        }
        other => panic!("unexpected plot data {other:?}"),
    }
}

/// Forced-reference data: pronouns dominate under subject focus; under
/// object focus they are likelier when the object is the verb's preferred
/// referent after `weil` (experiencer-stimulus verbs).
#[test]
fn pronoun_choice_follows_focus_and_object_bias() {
    let prompts = design(Experiment::E3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut records = Vec::new();
    for p in &prompts {
        let pr = match (p.cell.focus.unwrap(), p.verb.verb_class) {
            (Focus::Subject, _) => 0.85,
            (Focus::Object, VerbClass::ExperiencerStimulus) => 0.7,
            (Focus::Object, VerbClass::StimulusExperiencer) => 0.3,
        };
        let target = match p.cell.focus.unwrap() {
            Focus::Subject => CorefTarget::Subject,
            Focus::Object => CorefTarget::Object,
        };
        for rank in 0..3 {
            let form = if rng.random::<f64>() < pr { AnaphorForm::PersonalPronoun } else { AnaphorForm::ProperName };
            records.push(record(p, rank, target, form, RelationLabel::Explanation));
        }
    }
    let r = with_bundled(|a| run_experiment3(a, &prompts, &records)).unwrap();
    let gf = r.cell("grammatical_function").unwrap();
    assert!(gf.significant == Some(true) && gf.estimate.unwrap() > 0.0, "{gf:?}");
    assert_eq!(gf.mark, Some(DirectionMark::TowardHuman));
    let obj = r.cell("object_verb_class").unwrap();
    assert!(obj.significant == Some(true) && obj.estimate.unwrap() < 0.0, "{obj:?}");
    assert_eq!(obj.mark, Some(DirectionMark::TowardHuman));
    assert_eq!(r.cell("subject_verb_class").unwrap().mark, None);
    match &r.plot {
        PlotData::Forms(rows) => assert_eq!(rows.iter().map(|c| c.count).sum::<usize>(), records.len()),
        other => panic!("unexpected plot data {other:?}"),
    }
}

#[test]
fn reversed_geometry_is_marked_against_human() {
    let prompts = design(Experiment::E1, 4);
    let mut records = coreference_annotations(&prompts, 3, 5);
    for r in &mut records {
        r.coref_target = match r.coref_target {
            CorefTarget::Subject => CorefTarget::Object,
            _ => CorefTarget::Subject,
        };
    }
    let r = analyse(Experiment::E1, &prompts, &records).unwrap();
    let interaction = r.cell("interaction").unwrap();
    assert_eq!(interaction.significant, Some(true));
    assert_eq!(interaction.mark, Some(DirectionMark::AgainstHuman));
    assert_eq!(r.cell("icaus_verb_class").unwrap().mark, Some(DirectionMark::AgainstHuman));
    // flipping subject and object mirrors the per-verb biases, so the
    // correlation across bias types keeps its sign
    assert_eq!(r.cell("correlation").unwrap().mark, Some(DirectionMark::TowardHuman));
}
