//! Regenerates the recorded completions under `fixtures/replay` from a
//! small synthetic German "model".
//!
//! ```text
//! cargo run -p icbench-core --example make_fixtures -- fixtures/run.toml
//! ```
//!
//! The synthetic model has weak, human-direction verb biases and a
//! handful of continuations the annotator must exclude. Each prompt's
//! choices come from a ChaCha stream keyed by the prompt text, so the
//! output is byte-stable.

use std::path::PathBuf;

use icbench_core::config::RunConfig;
use icbench_core::design::{BiasType, Experiment, Focus, Gender, NameEntry, PromptRecord, VerbClass};
use icbench_core::genclient::replay::{ReplayBackend, ReplayFixture};
use icbench_core::genclient::{AllowedFirstForms, Choice};
use icbench_core::pipeline::Pipeline;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const CHOICES: usize = 10;

fn rng_for(text: &str) -> ChaCha8Rng {
    let digest = Sha256::digest(text.as_bytes());
    ChaCha8Rng::from_seed(digest.into())
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

fn pronoun(g: Gender) -> &'static str {
    match g {
        Gender::Feminine => "sie",
        Gender::Masculine => "er",
    }
}

fn demonstrative(g: Gender) -> &'static str {
    match g {
        Gender::Feminine => "diese",
        Gender::Masculine => "dieser",
    }
}

const BECAUSE: &[&str] = &[
    "immer so freundlich war.",
    "an diesem Tag besonders klug war.",
    "einen guten Witz erzählt hatte.",
    "sehr großzügig gewesen war.",
    "so viel Talent hatte.",
    "die Prüfung bestanden hatte.",
];

const SO_THAT: &[&str] = &[
    "sich sofort bedankte.",
    "laut lachen musste.",
    "am Abend nach Hause ging.",
    "ein Geschenk kaufte.",
    "lange nachdenken musste.",
    "rot wurde.",
];

/// Subordinate-clause continuations that name no prompt referent as subject.
const NO_REFERENT: &[&str] = &[
    "es an diesem Tag stark regnete.",
    "der Hund laut bellte.",
    "beide sehr müde waren.",
    "ihr Bruder krank war.",
];

fn referring(rng: &mut ChaCha8Rng, who: &NameEntry) -> String {
    let r: f64 = rng.random();
    if r < 0.6 {
        pronoun(who.gender).to_string()
    } else if r < 0.85 {
        who.name.clone()
    } else {
        demonstrative(who.gender).to_string()
    }
}

fn subject_probability(class: VerbClass, bias: BiasType) -> f64 {
    match (class, bias) {
        (VerbClass::StimulusExperiencer, BiasType::ICaus) => 0.75,
        (VerbClass::StimulusExperiencer, BiasType::ICons) => 0.2,
        (VerbClass::ExperiencerStimulus, BiasType::ICaus) => 0.3,
        (VerbClass::ExperiencerStimulus, BiasType::ICons) => 0.6,
    }
}

fn score(rng: &mut ChaCha8Rng, i: usize) -> Option<f64> {
    Some(-(4.0 + i as f64 * 0.5 + rng.random::<f64>() * 0.25))
}

fn coreference_choices(p: &PromptRecord) -> Vec<Choice> {
    let mut rng = rng_for(&p.prompt_text);
    let bias = p.cell.bias_type.expect("E1 prompt");
    let preds = if bias == BiasType::ICaus { BECAUSE } else { SO_THAT };
    (0..CHOICES)
        .map(|i| {
            let text = if rng.random::<f64>() < 0.15 {
                pick(&mut rng, NO_REFERENT).to_string()
            } else {
                let who = if rng.random::<f64>() < subject_probability(p.verb.verb_class, bias) {
                    &p.subject_name
                } else {
                    &p.object_name
                };
                format!("{} {}", referring(&mut rng, who), pick(&mut rng, preds))
            };
            Choice {
                text,
                logprob: score(&mut rng, i),
                n_tokens: None,
            }
        })
        .collect()
}

fn coherence_choices(p: &PromptRecord) -> Vec<Choice> {
    let mut rng = rng_for(&p.prompt_text);
    let explanation = match p.verb.verb_class {
        VerbClass::StimulusExperiencer => 0.3,
        VerbClass::ExperiencerStimulus => 0.4,
    };
    (0..CHOICES)
        .map(|i| {
            let who = if rng.random::<bool>() { &p.subject_name } else { &p.object_name };
            let r = referring(&mut rng, who);
            let u: f64 = rng.random();
            let text = if u < explanation {
                if rng.random::<f64>() < 0.7 {
                    format!("weil {r} {}", pick(&mut rng, BECAUSE))
                } else {
                    format!("denn {r} war sehr nett.")
                }
            } else if u < explanation + 0.3 {
                format!("als {r} nach Hause kam.")
            } else if u < explanation + 0.4 {
                format!("obwohl {r} sehr müde war.")
            } else if u < explanation + 0.48 {
                format!("sodass {r} {}", pick(&mut rng, SO_THAT))
            } else if u < explanation + 0.54 {
                format!("{r} lachte laut.")
            } else {
                let rel = match p.object_name.gender {
                    Gender::Feminine => "die",
                    Gender::Masculine => "der",
                };
                format!("{rel} sehr nett war.")
            };
            Choice {
                text,
                logprob: score(&mut rng, i),
                n_tokens: None,
            }
        })
        .collect()
}

/// Per-choice winning form for a forced-reference prompt: pronouns dominate
/// for subject focus; for object focus they are more likely when the
/// object is the verb's preferred referent.
fn forced_fixtures(p: &PromptRecord) -> Vec<ReplayFixture> {
    let focused = p.focused_name().expect("focus");
    let allowed = AllowedFirstForms::for_referent(focused).expect("valid forms");
    let forms = allowed.in_tie_break_order();
    let bias = p.cell.bias_type.expect("bias");
    let object_congruent = matches!(
        (p.verb.verb_class, bias),
        (VerbClass::ExperiencerStimulus, BiasType::ICaus) | (VerbClass::StimulusExperiencer, BiasType::ICons)
    );
    let p_pronoun = match (p.cell.focus.expect("focus"), object_congruent) {
        (Focus::Subject, _) => 0.85,
        (Focus::Object, true) => 0.6,
        (Focus::Object, false) => 0.4,
    };
    let preds = if bias == BiasType::ICaus { BECAUSE } else { SO_THAT };
    let mut rng = rng_for(&p.prompt_text);
    let mut winners = Vec::with_capacity(CHOICES);
    let mut rests = Vec::with_capacity(CHOICES);
    for _ in 0..CHOICES {
        let u: f64 = rng.random();
        winners.push(if u < p_pronoun {
            allowed.personal_pronoun.as_str()
        } else if u < p_pronoun + (1.0 - p_pronoun) * 0.4 {
            allowed.demonstrative.as_str()
        } else {
            allowed.proper_name.as_str()
        });
        rests.push(format!(" {}", pick(&mut rng, preds)));
    }
    forms
        .iter()
        .map(|form| ReplayFixture {
            prompt: format!("{}{form}", p.prompt_text),
            choices: (0..CHOICES)
                .map(|i| Choice {
                    text: rests[i].clone(),
                    logprob: Some(if winners[i] == *form { -8.0 } else { -12.0 - i as f64 * 0.1 }),
                    n_tokens: Some(4),
                })
                .collect(),
        })
        .collect()
}

/// Screening prompts: every name is referred back to congruently, except
/// Maria, who draws a masculine pronoun in 2 of her 9 annotatable
/// continuations. The fifth continuation has no referent for anyone.
fn screening_fixture(template: &str, name: &NameEntry) -> ReplayFixture {
    let prompt = template.replace("{name}", &name.name);
    let choices = (0..CHOICES)
        .map(|i| {
            let pr = if name.name == "Maria" && i % 3 == 1 { "er" } else { pronoun(name.gender) };
            let text = match i {
                4 => "es draußen dunkel wurde.".to_string(),
                _ => format!("{pr} {}", BECAUSE[i % BECAUSE.len()]),
            };
            Choice {
                text,
                logprob: Some(-5.0),
                n_tokens: Some(5),
            }
        })
        .collect();
    ReplayFixture { prompt, choices }
}

fn main() -> icbench_core::Result<()> {
    let config_path: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "fixtures/run.toml".into()).into();
    let mut config = RunConfig::load(&config_path)?;
    let replay = config.paths.replay_dir.clone().expect("fixture config names a replay dir");
    if replay.exists() {
        std::fs::remove_dir_all(&replay).map_err(|e| icbench_core::Error::io(&replay, e))?;
    }
    std::fs::create_dir_all(&replay).map_err(|e| icbench_core::Error::io(&replay, e))?;
    let scratch = tempfile_dir();
    config.paths.output_dir = scratch.clone();

    let pipeline = Pipeline::new(config.clone());
    let candidates = icbench_core::design::load_name_lexicon(&config.paths.names)?;
    for n in &candidates {
        screening_fixture(&config.screening.options.template, n).write(&replay)?;
    }
    let backend = ReplayBackend::new(&replay)?;
    if config.screening.enabled {
        pipeline.screen_names(&backend)?;
    }

    let mut written = candidates.len();
    for &e in &config.experiments {
        pipeline.design(e)?;
        for p in pipeline.read_design(e)? {
            let fixtures = match e {
                Experiment::E1 => vec![ReplayFixture {
                    prompt: p.prompt_text.clone(),
                    choices: coreference_choices(&p),
                }],
                Experiment::E2 => vec![ReplayFixture {
                    prompt: p.prompt_text.clone(),
                    choices: coherence_choices(&p),
                }],
                Experiment::E3 | Experiment::E4 => forced_fixtures(&p),
            };
            for f in fixtures {
                f.write(&replay)?;
                written += 1;
            }
        }
    }
    let _ = std::fs::remove_dir_all(&scratch);
    println!("wrote {written} fixtures to {}", replay.display());
    Ok(())
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("icbench-fixtures-{}", std::process::id()));
    let _ = std::fs::create_dir_all(&dir);
    dir
}
