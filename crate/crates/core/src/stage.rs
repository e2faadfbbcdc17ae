//! Stage files: line-delimited JSON with a one-line metadata header.
//!
//! ```text
//! <output_dir>/stages/<model_id>/names.txt
//! <output_dir>/stages/<model_id>/<experiment>/{design,continuations,annotations}.jsonl
//! <output_dir>/reports/<model_id>/<experiment>/...
//! ```

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Seeds;
use crate::design::Experiment;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Design,
    Continuations,
    Annotations,
}

impl StageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StageKind::Design => "design",
            StageKind::Continuations => "continuations",
            StageKind::Annotations => "annotations",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageHeader {
    pub schema_version: u32,
    pub kind: StageKind,
    pub experiment: Experiment,
    pub model_id: String,
    pub seeds: Seeds,
    pub config_hash: String,
    pub records: usize,
}

/// Writes to a sibling temp file and renames it into place, so a failed
/// run never leaves a truncated stage behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_stage<T: Serialize>(path: &Path, header: &StageHeader, records: &[T]) -> Result<()> {
    if header.records != records.len() {
        return Err(Error::Validation(format!(
            "header announces {} records, {} given",
            header.records,
            records.len()
        )));
    }
    let mut out = serde_json::to_string(header)?;
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Reads a stage written by [`write_stage`]. A missing file is a
/// dependency error naming the stage.
pub fn read_stage<T: DeserializeOwned>(path: &Path, kind: StageKind) -> Result<(StageHeader, Vec<T>)> {
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingStage {
                stage: kind.as_str().to_string(),
                path: path.to_path_buf(),
            })
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    let origin = path.display().to_string();
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| Error::Parse {
            path: origin.clone(),
            line: 1,
            message: "empty stage file".into(),
        })?;
    let header: StageHeader = serde_json::from_str(&first).map_err(|e| Error::Parse {
        path: origin.clone(),
        line: 1,
        message: format!("bad header: {e}"),
    })?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::Validation(format!(
            "{origin}: schema version {} (expected {SCHEMA_VERSION})",
            header.schema_version
        )));
    }
    if header.kind != kind {
        return Err(Error::Validation(format!(
            "{origin}: holds {} records, expected {}",
            header.kind.as_str(),
            kind.as_str()
        )));
    }
    let mut records = Vec::with_capacity(header.records);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: origin.clone(),
            line: i + 2,
            message: e.to_string(),
        })?);
    }
    if records.len() != header.records {
        return Err(Error::Validation(format!(
            "{origin}: header announces {} records, found {}",
            header.records,
            records.len()
        )));
    }
    Ok((header, records))
}

/// File locations for one model under an output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub root: PathBuf,
    pub model_id: String,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>, model_id: &str) -> Self {
        Layout {
            root: root.into(),
            model_id: model_id.to_string(),
        }
    }

    fn stage_dir(&self) -> PathBuf {
        self.root.join("stages").join(&self.model_id)
    }

    pub fn stage(&self, experiment: Experiment, kind: StageKind) -> PathBuf {
        self.stage_dir()
            .join(experiment.as_str())
            .join(format!("{}.jsonl", kind.as_str()))
    }

    /// Screened name lexicon.
    pub fn names(&self) -> PathBuf {
        self.stage_dir().join("names.txt")
    }

    pub fn screening(&self) -> PathBuf {
        self.stage_dir().join("screening.json")
    }

    pub fn agreement(&self) -> PathBuf {
        self.stage_dir().join("agreement.json")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn report_dir(&self, experiment: Experiment) -> PathBuf {
        self.reports().join(&self.model_id).join(experiment.as_str())
    }
}
