//! Deterministic backend serving recorded completions from disk.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, Choice, CompletionRequest};
use crate::error::{Error, Result};

/// One fixture file: the exact prompt and the recorded choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFixture {
    pub prompt: String,
    pub choices: Vec<Choice>,
}

impl ReplayFixture {
    /// File name for a prompt: hex SHA-256 of its UTF-8 bytes.
    pub fn file_name(prompt: &str) -> String {
        format!("{}.json", hex::encode(Sha256::digest(prompt.as_bytes())))
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir.as_ref().join(Self::file_name(&self.prompt));
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub struct ReplayBackend {
    dir: PathBuf,
    id: String,
    cache: Mutex<HashMap<String, Vec<Choice>>>,
    log: Mutex<Vec<String>>,
}

impl ReplayBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(Error::Transport(format!("replay directory {} does not exist", dir.display())));
        }
        Ok(ReplayBackend {
            dir,
            id: "replay".to_string(),
            cache: Mutex::new(HashMap::new()),
            log: Mutex::new(Vec::new()),
        })
    }

    /// Prompts requested so far, in arrival order.
    pub fn request_log(&self) -> Vec<String> {
        self.log.lock().expect("log poisoned").clone()
    }

    fn load(&self, prompt: &str) -> std::result::Result<Vec<Choice>, BackendError> {
        if let Some(c) = self.cache.lock().expect("cache poisoned").get(prompt) {
            return Ok(c.clone());
        }
        let path = self.dir.join(ReplayFixture::file_name(prompt));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| BackendError::Fatal(format!("no replay fixture for {prompt:?} ({}): {e}", path.display())))?;
        let fixture: ReplayFixture =
            serde_json::from_str(&text).map_err(|e| BackendError::Fatal(format!("{}: {e}", path.display())))?;
        if fixture.prompt != prompt {
            return Err(BackendError::Fatal(format!("{} records a different prompt", path.display())));
        }
        if fixture.choices.is_empty() {
            return Err(BackendError::Fatal(format!("{} has no choices", path.display())));
        }
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(prompt.to_string(), fixture.choices.clone());
        Ok(fixture.choices)
    }
}

impl Backend for ReplayBackend {
    fn id(&self) -> &str {
        &self.id
    }

    /// Returns `n` choices starting at `seed mod len`, wrapping around.
    fn complete(&self, request: &CompletionRequest) -> std::result::Result<Vec<Choice>, BackendError> {
        self.log.lock().expect("log poisoned").push(request.prompt.clone());
        let choices = self.load(&request.prompt)?;
        let offset = (request.decode.seed % choices.len() as u64) as usize;
        Ok((0..request.n).map(|i| choices[(offset + i) % choices.len()].clone()).collect())
    }
}
