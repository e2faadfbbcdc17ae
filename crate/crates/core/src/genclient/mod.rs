//! Text generation against pluggable completion backends.

pub mod http;
pub mod replay;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::annotate::tokenize;
use crate::design::{Gender, NameEntry, PromptRecord};
use crate::error::{Error, Result};

pub use http::{Dialect, HttpBackend, HttpConfig};
pub use replay::{ReplayBackend, ReplayFixture};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    DiverseBeam,
    PrefixScored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeConfig {
    pub strategy: Strategy,
    pub num_beams: usize,
    pub num_beam_groups: usize,
    pub diversity_penalty: f64,
    pub max_new_tokens: usize,
    pub n_return: usize,
    pub seed: u64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            strategy: Strategy::DiverseBeam,
            num_beams: 10,
            num_beam_groups: 10,
            diversity_penalty: 0.6,
            max_new_tokens: 40,
            n_return: 1,
            seed: 0,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.num_beams == 0 || self.num_beam_groups == 0 || self.n_return == 0 || self.max_new_tokens == 0 {
            return bad("num_beams, num_beam_groups, n_return and max_new_tokens must be positive".into());
        }
        if self.num_beams % self.num_beam_groups != 0 {
            return bad(format!(
                "num_beams {} is not divisible by num_beam_groups {}",
                self.num_beams, self.num_beam_groups
            ));
        }
        if self.n_return > self.num_beams {
            return bad(format!("n_return {} exceeds num_beams {}", self.n_return, self.num_beams));
        }
        if !(self.diversity_penalty.is_finite() && self.diversity_penalty >= 0.0) {
            return bad(format!("diversity_penalty {} must be non-negative", self.diversity_penalty));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationRecord {
    pub prompt_id: String,
    /// Position among the continuations returned for one request, best first.
    pub rank: usize,
    pub text: String,
    pub backend_id: String,
    /// Length-normalised or total log-probability; `None` when the backend
    /// reports no score.
    pub score: Option<f64>,
    pub decode: DecodeConfig,
    pub constrained_first: Option<String>,
}

/// The three referring expressions a forced-reference continuation may open with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllowedFirstForms {
    pub personal_pronoun: String,
    pub demonstrative: String,
    pub proper_name: String,
}

impl AllowedFirstForms {
    pub fn new(personal_pronoun: &str, demonstrative: &str, proper_name: &str) -> Result<Self> {
        let forms = [personal_pronoun, demonstrative, proper_name];
        if forms.iter().any(|f| f.trim().is_empty() || f.split_whitespace().count() != 1) {
            return Err(Error::Validation(format!("allowed forms must be single words: {forms:?}")));
        }
        if forms[0] == forms[1] || forms[0] == forms[2] || forms[1] == forms[2] {
            return Err(Error::Validation(format!("allowed forms must be distinct: {forms:?}")));
        }
        Ok(AllowedFirstForms {
            personal_pronoun: personal_pronoun.to_string(),
            demonstrative: demonstrative.to_string(),
            proper_name: proper_name.to_string(),
        })
    }

    /// Pronoun, demonstrative and name matching the gender of `name`.
    pub fn for_referent(name: &NameEntry) -> Result<Self> {
        let (pronoun, demonstrative) = match name.gender {
            Gender::Feminine => ("sie", "diese"),
            Gender::Masculine => ("er", "dieser"),
        };
        Self::new(pronoun, demonstrative, &name.name)
    }

    /// Forms in the order they are tried; the first wins ties.
    pub fn in_tie_break_order(&self) -> [&str; 3] {
        let mut forms = [
            self.personal_pronoun.as_str(),
            self.demonstrative.as_str(),
            self.proper_name.as_str(),
        ];
        forms.sort_unstable();
        forms
    }

    pub fn contains(&self, word: &str) -> bool {
        word == self.personal_pronoun || word == self.demonstrative || word == self.proper_name
    }
}

/// First whitespace or punctuation delimited word of `text`.
pub fn first_word(text: &str) -> Option<String> {
    tokenize(text).into_iter().next().filter(|t| t.is_word()).map(|t| t.surface)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub n: usize,
    pub decode: DecodeConfig,
    pub allowed_first_words: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub text: String,
    #[serde(default)]
    pub logprob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tokens: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackendError {
    /// Worth retrying: timeouts, rate limits, server errors.
    Transient(String),
    Fatal(String),
    Capability { field: String, detail: String },
}

impl From<BackendError> for Error {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::Transient(m) | BackendError::Fatal(m) => Error::Transport(m),
            BackendError::Capability { field, detail } => Error::Capability { field, detail },
        }
    }
}

pub trait Backend: Send + Sync {
    fn id(&self) -> &str;

    /// Rejects decoding parameters the backend cannot honour.
    fn check(&self, _decode: &DecodeConfig) -> std::result::Result<(), BackendError> {
        Ok(())
    }

    /// Whether `allowed_first_words` in a request is enforced by the backend.
    fn supports_first_word_mask(&self) -> bool {
        false
    }

    fn complete(&self, request: &CompletionRequest) -> std::result::Result<Vec<Choice>, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: usize,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

pub struct Generator<'a> {
    backend: &'a dyn Backend,
    pub retry: RetryPolicy,
    /// Maximum requests in flight.
    pub concurrency: usize,
}

fn clean_text(prompt: &str, raw: &str) -> String {
    let text = raw.strip_prefix(prompt).unwrap_or(raw);
    text.trim_start().to_string()
}

fn by_score_then_text(a: &(String, Option<f64>), b: &(String, Option<f64>)) -> std::cmp::Ordering {
    let sa = a.1.unwrap_or(f64::NEG_INFINITY);
    let sb = b.1.unwrap_or(f64::NEG_INFINITY);
    sb.total_cmp(&sa).then_with(|| a.0.cmp(&b.0))
}

impl<'a> Generator<'a> {
    pub fn new(backend: &'a dyn Backend) -> Self {
        Generator {
            backend,
            retry: RetryPolicy::default(),
            concurrency: 4,
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_concurrency(mut self, concurrency: usize) -> Self {
        self.concurrency = concurrency.max(1);
        self
    }

    pub fn backend_id(&self) -> &str {
        self.backend.id()
    }

    fn call(&self, request: &CompletionRequest) -> Result<Vec<Choice>> {
        let attempts = self.retry.attempts.max(1);
        let mut last = String::new();
        for attempt in 0..attempts {
            match self.backend.complete(request) {
                Ok(choices) => return Ok(choices),
                Err(BackendError::Transient(m)) => {
                    tracing::warn!(attempt = attempt + 1, error = %m, "transient backend failure");
                    last = m;
                    if attempt + 1 < attempts {
                        std::thread::sleep(self.retry.base_delay * 2u32.saturating_pow(attempt as u32));
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(Error::Transport(format!("gave up after {attempts} attempts: {last}")))
    }

    /// Up to `config.n_return` continuations of `prompt`, best first.
    pub fn generate(&self, prompt_id: &str, prompt: &str, config: &DecodeConfig) -> Result<Vec<ContinuationRecord>> {
        config.validate()?;
        self.backend.check(config)?;
        let request = CompletionRequest {
            prompt: prompt.to_string(),
            n: config.n_return,
            decode: config.clone(),
            allowed_first_words: None,
        };
        let mut scored: Vec<(String, Option<f64>)> = self
            .call(&request)?
            .into_iter()
            .map(|c| (clean_text(prompt, &c.text), c.logprob))
            .filter(|(t, _)| !t.trim().is_empty())
            .collect();
        if scored.is_empty() {
            return Err(Error::Validation(format!("backend returned no usable continuation for {prompt_id}")));
        }
        scored.sort_by(by_score_then_text);
        scored.truncate(config.n_return);
        Ok(scored
            .into_iter()
            .enumerate()
            .map(|(rank, (text, score))| ContinuationRecord {
                prompt_id: prompt_id.to_string(),
                rank,
                text,
                backend_id: self.backend.id().to_string(),
                score,
                decode: config.clone(),
                constrained_first: None,
            })
            .collect())
    }

    /// One continuation whose first word is an allowed form. Uses the
    /// backend's own mask when available, otherwise scores each form as a
    /// forced prefix and keeps the best mean per-token log-probability.
    pub fn generate_constrained(
        &self,
        prompt_id: &str,
        prompt: &str,
        allowed: &AllowedFirstForms,
        config: &DecodeConfig,
    ) -> Result<ContinuationRecord> {
        config.validate()?;
        self.backend.check(config)?;
        let record = if self.backend.supports_first_word_mask() {
            self.masked(prompt_id, prompt, allowed, config)?
        } else {
            self.prefix_scored(prompt_id, prompt, allowed, config)?
        };
        let first = first_word(&record.text);
        if first.as_deref() != record.constrained_first.as_deref() || !first.as_deref().is_some_and(|w| allowed.contains(w)) {
            return Err(Error::Validation(format!(
                "continuation for {prompt_id} does not open with an allowed form: {:?}",
                record.text
            )));
        }
        Ok(record)
    }

    fn masked(&self, prompt_id: &str, prompt: &str, allowed: &AllowedFirstForms, config: &DecodeConfig) -> Result<ContinuationRecord> {
        let request = CompletionRequest {
            prompt: prompt.to_string(),
            n: 1,
            decode: config.clone(),
            allowed_first_words: Some(allowed.in_tie_break_order().iter().map(|s| s.to_string()).collect()),
        };
        let mut scored: Vec<(String, Option<f64>)> = self
            .call(&request)?
            .into_iter()
            .map(|c| (clean_text(prompt, &c.text), c.logprob))
            .filter(|(t, _)| first_word(t).is_some_and(|w| allowed.contains(&w)))
            .collect();
        scored.sort_by(by_score_then_text);
        let (text, score) = scored
            .into_iter()
            .next()
            .ok_or_else(|| Error::Validation(format!("masked generation for {prompt_id} ignored the allowed forms")))?;
        Ok(ContinuationRecord {
            prompt_id: prompt_id.to_string(),
            rank: 0,
            constrained_first: first_word(&text),
            text,
            backend_id: self.backend.id().to_string(),
            score,
            decode: config.clone(),
        })
    }

    fn prefix_scored(
        &self,
        prompt_id: &str,
        prompt: &str,
        allowed: &AllowedFirstForms,
        config: &DecodeConfig,
    ) -> Result<ContinuationRecord> {
        let mut decode = config.clone();
        decode.strategy = Strategy::PrefixScored;
        let mut best: Option<(f64, String, &str)> = None;
        let mut failures = Vec::new();
        for form in allowed.in_tie_break_order() {
            let forced = format!("{prompt}{form}");
            let request = CompletionRequest {
                prompt: forced.clone(),
                n: 1,
                decode: decode.clone(),
                allowed_first_words: None,
            };
            let choices = match self.call(&request) {
                Ok(c) => c,
                Err(e @ Error::Transport(_)) => {
                    failures.push(format!("{form}: {e}"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            for c in choices {
                let rest = c.text.strip_prefix(forced.as_str()).unwrap_or(&c.text);
                // a continuation gluing letters onto the form changes the word
                if rest.chars().next().is_some_and(char::is_alphanumeric) {
                    continue;
                }
                let text = format!("{form}{rest}");
                let logprob = c.logprob.ok_or_else(|| Error::Capability {
                    field: "logprob".into(),
                    detail: "prefix scoring needs log-probabilities".into(),
                })?;
                let n_tokens = c.n_tokens.unwrap_or_else(|| tokenize(&text).len()).max(1);
                let score = logprob / n_tokens as f64;
                if best.as_ref().map_or(true, |b| score > b.0) {
                    best = Some((score, text.trim_end().to_string(), form));
                }
            }
        }
        let Some((score, text, form)) = best else {
            if failures.len() == 3 {
                return Err(Error::Transport(format!("all prefix generations failed: {}", failures.join("; "))));
            }
            return Err(Error::Validation(format!("no usable prefix continuation for {prompt_id}")));
        };
        Ok(ContinuationRecord {
            prompt_id: prompt_id.to_string(),
            rank: 0,
            text,
            backend_id: self.backend.id().to_string(),
            score: Some(score),
            decode,
            constrained_first: Some(form.to_string()),
        })
    }

    /// Runs `job` over `items` with at most `self.concurrency` in flight;
    /// results come back in item order.
    fn run_bounded<T: Sync, R: Send>(&self, items: &[T], job: impl Fn(&T) -> R + Sync) -> Vec<R> {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
        std::thread::scope(|s| {
            for _ in 0..self.concurrency.min(items.len()).max(1) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= items.len() {
                        break;
                    }
                    let r = job(&items[i]);
                    slots.lock().expect("result slots poisoned")[i] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .expect("result slots poisoned")
            .into_iter()
            .map(|r| r.expect("every item processed"))
            .collect()
    }

    /// Free continuations for every prompt, keeping the best `keep`.
    /// Output is sorted by prompt id, then rank.
    pub fn generate_design(&self, prompts: &[PromptRecord], config: &DecodeConfig, keep: usize) -> Result<Vec<ContinuationRecord>> {
        let results = self.run_bounded(prompts, |p| self.generate(&p.id, &p.prompt_text, config));
        let mut out = Vec::new();
        for r in results {
            out.extend(r?.into_iter().take(keep.max(1)));
        }
        out.sort_by(|a, b| a.prompt_id.cmp(&b.prompt_id).then(a.rank.cmp(&b.rank)));
        Ok(out)
    }

    /// Forced-reference continuations, cycling over the prompts of each
    /// condition cell until every cell holds at least `target_per_cell`.
    pub fn sample_until(
        &self,
        prompts: &[PromptRecord],
        target_per_cell: usize,
        options: &SampleOptions,
        config: &DecodeConfig,
    ) -> Result<Vec<ContinuationRecord>> {
        if target_per_cell == 0 {
            return Err(Error::Validation("target_per_cell must be at least 1".into()));
        }
        let mut cells: BTreeMap<String, Vec<&PromptRecord>> = BTreeMap::new();
        for p in prompts {
            if p.cell.focus.is_none() {
                return Err(Error::Validation(format!("prompt {} has no referent focus", p.id)));
            }
            cells.entry(cell_key(p)).or_default().push(p);
        }
        let mut counts: BTreeMap<&str, usize> = cells.keys().map(|k| (k.as_str(), 0)).collect();
        let mut cursors: HashMap<&str, usize> = HashMap::new();
        let mut visits: HashMap<&str, u64> = HashMap::new();
        let mut out = Vec::new();
        let batch = options.batch_per_cell.max(1);
        for _round in 0..options.max_rounds {
            let mut jobs: Vec<(&PromptRecord, u64)> = Vec::new();
            for (key, members) in &cells {
                if counts[key.as_str()] >= target_per_cell {
                    continue;
                }
                let cursor = cursors.entry(key.as_str()).or_insert(0);
                for _ in 0..batch {
                    let p = members[*cursor % members.len()];
                    *cursor += 1;
                    let v = visits.entry(p.id.as_str()).or_insert(0);
                    jobs.push((p, config.seed.wrapping_add(*v)));
                    *v += 1;
                }
            }
            if jobs.is_empty() {
                break;
            }
            let results = self.run_bounded(&jobs, |(p, seed)| {
                let allowed = AllowedFirstForms::for_referent(p.focused_name().expect("focus checked"))?;
                let mut decode = config.clone();
                decode.seed = *seed;
                self.generate_constrained(&p.id, &p.prompt_text, &allowed, &decode)
            });
            for ((p, _), r) in jobs.iter().zip(results) {
                match r {
                    Ok(record) => {
                        *counts.get_mut(cell_key(p).as_str()).expect("known cell") += 1;
                        out.push(record);
                    }
                    Err(Error::Validation(m)) => tracing::warn!(prompt = %p.id, "discarded continuation: {m}"),
                    Err(e) => return Err(e),
                }
            }
        }
        let deficits: Vec<(String, usize)> = counts
            .iter()
            .filter(|(_, &c)| c < target_per_cell)
            .map(|(k, &c)| (k.to_string(), target_per_cell - c))
            .collect();
        if !deficits.is_empty() {
            return Err(Error::Starvation {
                attempts: options.max_rounds,
                collected: out.len(),
                deficits,
            });
        }
        out.sort_by(|a, b| a.prompt_id.cmp(&b.prompt_id).then(a.decode.seed.cmp(&b.decode.seed)));
        // repeated visits to one prompt become ranks 0, 1, ...
        let mut rank = 0;
        for i in 0..out.len() {
            rank = if i > 0 && out[i - 1].prompt_id == out[i].prompt_id { rank + 1 } else { 0 };
            out[i].rank = rank;
        }
        Ok(out)
    }
}

/// Sampling condition of a prompt: verb class plus its condition cell,
/// e.g. `SE/icaus-fm-subj`. A forced-reference experiment thus samples
/// eight conditions (class x focus x gender order).
pub fn cell_key(p: &PromptRecord) -> String {
    format!("{}/{}", p.verb.verb_class.code(), p.cell.code())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleOptions {
    /// Prompts visited per deficient cell and round.
    pub batch_per_cell: usize,
    pub max_rounds: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            batch_per_cell: 25,
            max_rounds: 200,
        }
    }
}
