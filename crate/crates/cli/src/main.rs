//! `icbench`: run the benchmark stages from the command line.
//!
//! Every subcommand reads a run config, touches only its own stage files
//! and prints a JSON summary on success. Failures print a JSON error
//! object on stderr and exit nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use icbench_core::config::RunConfig;
use icbench_core::design::Experiment;
use icbench_core::pipeline::{backend_from_config, Pipeline};
use icbench_core::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "icbench", version, about = "Implicit-causality bias benchmark for text-completion models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (.toml or .json).
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides `paths.output_dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PerExperiment {
    #[command(flatten)]
    common: Common,
    /// E1..E4; defaults to the experiments listed in the config.
    #[arg(long, short, value_parser = parse_experiment)]
    experiment: Vec<Experiment>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the factorial item design.
    Design(PerExperiment),
    /// Screen the name lexicon for gender-incongruent back-reference.
    ScreenNames {
        #[command(flatten)]
        common: Common,
        /// `replay:<dir>` or an http(s) endpoint; overrides the config.
        #[arg(long)]
        backend: Option<String>,
    },
    /// Collect continuations for the design.
    Generate {
        #[command(flatten)]
        run: PerExperiment,
        /// `replay:<dir>` or an http(s) endpoint; overrides the config.
        #[arg(long)]
        backend: Option<String>,
    },
    /// Label continuations with the rule-based annotator.
    Annotate(PerExperiment),
    /// Agreement of the annotator with a hand-labeled corpus.
    Agree {
        #[command(flatten)]
        common: Common,
        /// Gold JSONL; defaults to `paths.gold`.
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// Fit the analysis recipe and write the report files.
    Analyze(PerExperiment),
    /// Every stage for every configured experiment.
    All {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        backend: Option<String>,
    },
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(common: &Common) -> icbench_core::Result<Pipeline> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(dir) = &common.output_dir {
        config.paths.output_dir = dir.clone();
    }
    Ok(Pipeline::new(config))
}

fn experiments(p: &Pipeline, chosen: &[Experiment]) -> Vec<Experiment> {
    if chosen.is_empty() {
        p.config.experiments.clone()
    } else {
        chosen.to_vec()
    }
}

fn per_experiment(
    run: &PerExperiment,
    stage: impl Fn(&Pipeline, Experiment) -> icbench_core::Result<PathBuf>,
) -> icbench_core::Result<Value> {
    let p = load(&run.common)?;
    let mut out = serde_json::Map::new();
    for e in experiments(&p, &run.experiment) {
        out.insert(e.to_string(), json!(stage(&p, e)?));
    }
    Ok(Value::Object(out))
}

fn run(cli: Cli) -> icbench_core::Result<Value> {
    match cli.command {
        Command::Design(run) => per_experiment(&run, |p, e| p.design(e)),
        Command::ScreenNames { common, backend } => {
            let p = load(&common)?;
            let b = backend_from_config(&p.config, backend.as_deref())?;
            let screens = p.screen_names(b.as_ref())?;
            Ok(json!({ "names": p.layout.names(), "screened": screens }))
        }
        Command::Generate { run, backend } => {
            let p = load(&run.common)?;
            let b = backend_from_config(&p.config, backend.as_deref())?;
            let mut out = serde_json::Map::new();
            for e in experiments(&p, &run.experiment) {
                out.insert(e.to_string(), json!(p.generate(e, b.as_ref())?));
            }
            Ok(Value::Object(out))
        }
        Command::Annotate(run) => per_experiment(&run, |p, e| p.annotate(e)),
        Command::Agree { common, gold } => {
            let p = load(&common)?;
            let report = p.agree(gold.as_deref())?;
            Ok(json!({
                "items": report.items,
                "coref_kappa": report.coref_kappa,
                "relation_items": report.relation_items,
                "relation_kappa": report.relation_kappa,
                "disagreements": report.disagreements.len(),
                "report": p.layout.agreement(),
            }))
        }
        Command::Analyze(run) => per_experiment(&run, |p, e| p.analyze(e)),
        Command::All { common, backend } => {
            let p = load(&common)?;
            let b = backend_from_config(&p.config, backend.as_deref())?;
            Ok(json!({ "reports": p.run_all(b.as_ref())? }))
        }
    }
}

fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    match e {
        Error::MissingStage { stage, path } => {
            v["error"]["stage"] = json!(stage);
            v["error"]["path"] = json!(path);
        }
        Error::Capability { field, .. } => v["error"]["field"] = json!(field),
        Error::Starvation { deficits, collected, .. } => {
            v["error"]["collected"] = json!(collected);
            v["error"]["deficits"] = json!(deficits);
        }
        _ => {}
    }
    v
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(if matches!(e, Error::MissingStage { .. }) { 3 } else { 1 })
        }
    }
}
