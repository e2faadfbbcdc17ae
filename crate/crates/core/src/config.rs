//! Run configuration: one TOML or JSON file per backend run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::design::{Experiment, ScreeningOptions};
use crate::error::{Error, Result};
use crate::genclient::http::Dialect;
use crate::genclient::DecodeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub pairing: u64,
    pub bootstrap: u64,
    pub decode: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            pairing: 1,
            bootstrap: 2,
            decode: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Replay,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default = "default_dialect")]
    pub dialect: Dialect,
    #[serde(default)]
    pub model: Option<String>,
    /// May be `${VAR}`; interpolated from the environment at load time.
    #[serde(default)]
    pub auth_token: Option<String>,
    #[serde(default)]
    pub first_word_mask: bool,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retry_attempts")]
    pub retry_attempts: usize,
    #[serde(default = "default_retry_base_ms")]
    pub retry_base_ms: u64,
}

fn default_dialect() -> Dialect {
    Dialect::Generic
}
fn default_concurrency() -> usize {
    4
}
fn default_timeout() -> u64 {
    60
}
fn default_retry_attempts() -> usize {
    3
}
fn default_retry_base_ms() -> u64 {
    500
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Replay,
            endpoint: None,
            dialect: default_dialect(),
            model: None,
            auth_token: None,
            first_word_mask: false,
            concurrency: default_concurrency(),
            timeout_secs: default_timeout(),
            retry_attempts: default_retry_attempts(),
            retry_base_ms: default_retry_base_ms(),
        }
    }
}

/// Input and output locations; relative entries resolve against the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub verbs: PathBuf,
    pub names: PathBuf,
    #[serde(default)]
    pub connectives: Option<PathBuf>,
    #[serde(default)]
    pub replay_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub gold: Option<PathBuf>,
    #[serde(default)]
    pub recipes: Option<PathBuf>,
    #[serde(default)]
    pub human_reference: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Records per condition cell for the forced-reference experiments.
    #[serde(default = "default_target")]
    pub target_per_cell: usize,
    #[serde(default = "default_batch")]
    pub batch_per_cell: usize,
    #[serde(default = "default_rounds")]
    pub max_rounds: usize,
    /// Continuations kept per prompt in the free-continuation experiments.
    #[serde(default = "default_keep")]
    pub keep: usize,
}

fn default_target() -> usize {
    1000
}
fn default_batch() -> usize {
    25
}
fn default_rounds() -> usize {
    200
}
fn default_keep() -> usize {
    1
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            target_per_cell: default_target(),
            batch_per_cell: default_batch(),
            max_rounds: default_rounds(),
            keep: default_keep(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(flatten)]
    pub options: ScreeningOptions,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        ScreeningConfig {
            enabled: false,
            options: ScreeningOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_inner")]
    pub max_inner: usize,
    #[serde(default = "default_outer")]
    pub max_outer: usize,
}

fn default_alpha() -> f64 {
    0.05
}
fn default_resamples() -> usize {
    2000
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_inner() -> usize {
    100
}
fn default_outer() -> usize {
    200
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            alpha: default_alpha(),
            bootstrap_resamples: default_resamples(),
            tolerance: default_tolerance(),
            max_inner: default_inner(),
            max_outer: default_outer(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model_id: String,
    #[serde(default = "all_experiments")]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub decode: DecodeConfig,
    #[serde(default)]
    pub seeds: Seeds,
    pub paths: Paths,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub screening: ScreeningConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

fn all_experiments() -> Vec<Experiment> {
    Experiment::ALL.to_vec()
}

impl RunConfig {
    /// Reads a `.toml` or `.json` file, resolves relative paths and
    /// interpolates the auth token.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut config = Self::parse(&text, is_json, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.interpolate_secrets(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    pub fn parse(text: &str, json: bool, origin: &str) -> Result<Self> {
        let config: RunConfig = if json {
            serde_json::from_str(text)?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse {
                path: origin.to_string(),
                line: e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0),
                message: e.message().to_string(),
            })?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_id.is_empty()
            || !self.model_id.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
        {
            return Err(Error::Validation(format!(
                "model_id `{}` must be non-empty and use only [A-Za-z0-9._-]",
                self.model_id
            )));
        }
        if self.experiments.is_empty() {
            return Err(Error::Validation("no experiments selected".into()));
        }
        if !(self.analysis.alpha > 0.0 && self.analysis.alpha < 1.0) {
            return Err(Error::Validation(format!("alpha {} outside (0, 1)", self.analysis.alpha)));
        }
        if self.analysis.bootstrap_resamples < 100 {
            return Err(Error::Validation("bootstrap_resamples must be at least 100".into()));
        }
        if self.sampling.keep == 0 || self.sampling.target_per_cell == 0 || self.sampling.batch_per_cell == 0 {
            return Err(Error::Validation("sampling sizes must be positive".into()));
        }
        if self.backend.concurrency == 0 {
            return Err(Error::Validation("backend concurrency must be at least 1".into()));
        }
        if self.backend.kind == BackendKind::Http && self.backend.endpoint.is_none() {
            return Err(Error::Validation("http backend needs an endpoint".into()));
        }
        self.decode.validate()
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        fix(&mut p.verbs);
        fix(&mut p.names);
        fix(&mut p.output_dir);
        for opt in [
            &mut p.connectives,
            &mut p.replay_dir,
            &mut p.gold,
            &mut p.recipes,
            &mut p.human_reference,
        ] {
            if let Some(v) = opt.as_mut() {
                fix(v);
            }
        }
    }

    /// Replaces a `${VAR}` auth token with the variable's value. Nothing
    /// else in the file is interpolated.
    pub fn interpolate_secrets(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(token) = &self.backend.auth_token {
            if let Some(var) = token.strip_prefix("${").and_then(|t| t.strip_suffix('}')) {
                let value = lookup(var).ok_or_else(|| {
                    Error::Validation(format!("environment variable `{var}` for the auth token is not set"))
                })?;
                self.backend.auth_token = Some(value);
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of everything that shapes results.
    /// Secrets and filesystem locations are left out so the hash is stable
    /// across machines.
    pub fn hash(&self) -> String {
        let mut canon = serde_json::to_value(self).expect("config serialises");
        if let Some(obj) = canon.as_object_mut() {
            obj.remove("paths");
            if let Some(b) = obj.get_mut("backend").and_then(|b| b.as_object_mut()) {
                b.remove("auth_token");
                b.remove("concurrency");
                b.remove("timeout_secs");
                b.remove("retry_attempts");
                b.remove("retry_base_ms");
            }
        }
        // serde_json maps are ordered by key, so this is canonical.
        let text = serde_json::to_string(&canon).expect("value serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Decode settings with the configured decode seed applied.
    pub fn decode_config(&self) -> DecodeConfig {
        let mut d = self.decode.clone();
        d.seed = self.seeds.decode;
        d
    }
}
