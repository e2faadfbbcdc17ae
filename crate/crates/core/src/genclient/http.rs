//! JSON-over-HTTP completion backends.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, BackendError, Choice, CompletionRequest, DecodeConfig, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    /// `{prompt, n, strategy, num_beams, ...}` in, `{choices: [{text, logprob}]}` out.
    Generic,
    /// OpenAI-style `/v1/completions`; sampling only, no beam parameters.
    Openai,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpConfig {
    pub endpoint: String,
    pub dialect: Dialect,
    #[serde(default)]
    pub model: Option<String>,
    /// Bearer token, resolved from the environment by the caller.
    #[serde(skip)]
    pub auth_token: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// The server enforces `allowed_first_words` (generic dialect only).
    #[serde(default)]
    pub first_word_mask: bool,
}

fn default_timeout_secs() -> u64 {
    60
}

pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    id: String,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> crate::Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| crate::Error::Transport(e.to_string()))?;
        let id = match &config.model {
            Some(m) => format!("http:{m}"),
            None => format!("http:{}", config.endpoint),
        };
        Ok(HttpBackend { config, client, id })
    }

    fn body(&self, request: &CompletionRequest) -> Value {
        let d = &request.decode;
        match self.config.dialect {
            Dialect::Generic => {
                let mut body = json!({
                    "prompt": request.prompt,
                    "n": request.n,
                    "strategy": d.strategy,
                    "num_beams": d.num_beams,
                    "num_beam_groups": d.num_beam_groups,
                    "diversity_penalty": d.diversity_penalty,
                    "max_new_tokens": d.max_new_tokens,
                    "seed": d.seed,
                });
                if let Some(m) = &self.config.model {
                    body["model"] = json!(m);
                }
                if let Some(words) = &request.allowed_first_words {
                    body["allowed_first_words"] = json!(words);
                }
                body
            }
            Dialect::Openai => json!({
                "model": self.config.model,
                "prompt": request.prompt,
                "n": request.n,
                "max_tokens": d.max_new_tokens,
                "seed": d.seed,
                "logprobs": 1,
                "echo": false,
            }),
        }
    }

    fn parse(&self, body: Value) -> Result<Vec<Choice>, BackendError> {
        let choices = body
            .get("choices")
            .and_then(Value::as_array)
            .ok_or_else(|| BackendError::Fatal("response has no `choices` array".into()))?;
        choices
            .iter()
            .map(|c| {
                let text = c
                    .get("text")
                    .and_then(Value::as_str)
                    .ok_or_else(|| BackendError::Fatal("choice without `text`".into()))?
                    .to_string();
                let (logprob, n_tokens) = match self.config.dialect {
                    Dialect::Generic => (
                        c.get("logprob").and_then(Value::as_f64),
                        c.get("n_tokens").and_then(Value::as_u64).map(|n| n as usize),
                    ),
                    Dialect::Openai => match c.pointer("/logprobs/token_logprobs").and_then(Value::as_array) {
                        Some(lps) => {
                            let vals: Vec<f64> = lps.iter().filter_map(Value::as_f64).collect();
                            (Some(vals.iter().sum()), Some(vals.len()))
                        }
                        None => (None, None),
                    },
                };
                Ok(Choice { text, logprob, n_tokens })
            })
            .collect()
    }
}

fn unsupported(field: &str, detail: &str) -> BackendError {
    BackendError::Capability {
        field: field.to_string(),
        detail: detail.to_string(),
    }
}

/// Request fields a backend may refuse, longest first so that
/// `num_beam_groups` is not reported as `num_beams`.
const DECODE_FIELDS: [&str; 7] = [
    "allowed_first_words",
    "diversity_penalty",
    "num_beam_groups",
    "max_new_tokens",
    "num_beams",
    "strategy",
    "seed",
];

/// The decoding field named in a client-error body, if any.
fn rejected_decode_field(body: &str) -> Option<&'static str> {
    DECODE_FIELDS.into_iter().find(|f| body.contains(f))
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn check(&self, d: &DecodeConfig) -> Result<(), BackendError> {
        if self.config.dialect == Dialect::Openai && d.strategy == Strategy::DiverseBeam {
            if d.num_beams > 1 {
                return Err(unsupported("num_beams", "completion dialect has no beam search"));
            }
            if d.num_beam_groups > 1 {
                return Err(unsupported("num_beam_groups", "completion dialect has no beam groups"));
            }
            if d.diversity_penalty > 0.0 {
                return Err(unsupported("diversity_penalty", "completion dialect has no diversity penalty"));
            }
        }
        Ok(())
    }

    fn supports_first_word_mask(&self) -> bool {
        self.config.dialect == Dialect::Generic && self.config.first_word_mask
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Vec<Choice>, BackendError> {
        let mut req = self.client.post(&self.config.endpoint).json(&self.body(request));
        if let Some(token) = &self.config.auth_token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() || e.is_connect() || e.is_request() {
                BackendError::Transient(e.to_string())
            } else {
                BackendError::Fatal(e.to_string())
            }
        })?;
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(BackendError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let detail = resp.text().unwrap_or_default();
            if status.is_client_error() {
                if let Some(field) = rejected_decode_field(&detail) {
                    return Err(unsupported(field, &format!("HTTP {status}: {detail}")));
                }
            }
            return Err(BackendError::Fatal(format!("HTTP {status}: {detail}")));
        }
        let body: Value = resp.json().map_err(|e| BackendError::Fatal(format!("malformed response: {e}")))?;
        self.parse(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genclient::{Generator, RetryPolicy};
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;

    /// Serves the canned `(status, body)` responses in order, one per
    /// connection, and forwards each request body.
    fn serve(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                tx.send(String::from_utf8(buf).unwrap()).unwrap();
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}/complete"), rx)
    }

    fn backend(endpoint: String, dialect: Dialect) -> HttpBackend {
        HttpBackend::new(HttpConfig {
            endpoint,
            dialect,
            model: Some("m".into()),
            auth_token: None,
            timeout_secs: 5,
            first_word_mask: false,
        })
        .unwrap()
    }

    #[test]
    fn generic_round_trip_with_retry() {
        let ok = r#"{"choices":[{"text":"sie klug war.","logprob":-3.5}]}"#.to_string();
        let (url, rx) = serve(vec![(503, "{}".into()), (200, ok)]);
        let b = backend(url, Dialect::Generic);
        let g = Generator::new(&b).with_retry(RetryPolicy {
            attempts: 3,
            base_delay: Duration::from_millis(1),
        });
        let out = g.generate("p", "Maria faszinierte Peter, weil ", &DecodeConfig::default()).unwrap();
        assert_eq!(out[0].text, "sie klug war.");
        assert_eq!(out[0].score, Some(-3.5));
        let sent: Value = serde_json::from_str(&rx.recv().unwrap()).unwrap();
        assert_eq!(sent["prompt"], "Maria faszinierte Peter, weil ");
        assert_eq!(sent["num_beams"], 10);
        assert_eq!(sent["diversity_penalty"], 0.6);
        assert_eq!(sent["strategy"], "diverse_beam");
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, _rx) = serve(vec![(400, r#"{"error":"bad"}"#.into())]);
        let b = backend(url, Dialect::Generic);
        let g = Generator::new(&b);
        assert!(matches!(g.generate("p", "x", &DecodeConfig::default()), Err(crate::Error::Transport(_))));
    }

    #[test]
    fn rejected_decoding_field_is_a_capability_error() {
        let body = r#"{"error":"unsupported parameter: num_beam_groups"}"#;
        let (url, _rx) = serve(vec![(422, body.into())]);
        let b = backend(url, Dialect::Generic);
        let e = Generator::new(&b).generate("p", "x", &DecodeConfig::default()).unwrap_err();
        assert!(matches!(e, crate::Error::Capability { ref field, .. } if field == "num_beam_groups"), "{e}");
    }

    #[test]
    fn openai_dialect_rejects_beam_parameters() {
        let b = backend("http://127.0.0.1:9/".into(), Dialect::Openai);
        let g = Generator::new(&b);
        let e = g.generate("p", "x", &DecodeConfig::default()).unwrap_err();
        assert!(matches!(e, crate::Error::Capability { ref field, .. } if field == "num_beams"));
        let d = DecodeConfig { num_beams: 1, num_beam_groups: 1, ..DecodeConfig::default() };
        let e = g.generate("p", "x", &d).unwrap_err();
        assert!(matches!(e, crate::Error::Capability { ref field, .. } if field == "diversity_penalty"));
    }

    #[test]
    fn openai_logprobs_are_summed() {
        let body = r#"{"choices":[{"text":" er lachte.","logprobs":{"token_logprobs":[-1.0,-0.5,-0.25]}}]}"#;
        let (url, rx) = serve(vec![(200, body.into())]);
        let b = backend(url, Dialect::Openai);
        let d = DecodeConfig {
            strategy: Strategy::PrefixScored,
            num_beams: 1,
            num_beam_groups: 1,
            diversity_penalty: 0.0,
            ..DecodeConfig::default()
        };
        let out = Generator::new(&b).generate("p", "x", &d).unwrap();
        assert_eq!(out[0].score, Some(-1.75));
        let sent: Value = serde_json::from_str(&rx.recv().unwrap()).unwrap();
        assert_eq!(sent["max_tokens"], 40);
        assert!(sent.get("num_beams").is_none());
    }
}
