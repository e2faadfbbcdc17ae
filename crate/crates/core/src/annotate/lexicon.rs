use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tokenize::Token;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationLabel {
    Explanation,
    Consequence,
    Contrast,
    Elaboration,
    Temporal,
    Background,
    Other,
    None,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 8] = [
        RelationLabel::Explanation,
        RelationLabel::Consequence,
        RelationLabel::Contrast,
        RelationLabel::Elaboration,
        RelationLabel::Temporal,
        RelationLabel::Background,
        RelationLabel::Other,
        RelationLabel::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationLabel::Explanation => "explanation",
            RelationLabel::Consequence => "consequence",
            RelationLabel::Contrast => "contrast",
            RelationLabel::Elaboration => "elaboration",
            RelationLabel::Temporal => "temporal",
            RelationLabel::Background => "background",
            RelationLabel::Other => "other",
            RelationLabel::None => "none",
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelationLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Validation(format!("unknown relation label `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectiveLexiconEntry {
    pub surface: String,
    pub relation: RelationLabel,
    /// When false the connective is also recognised right after the finite
    /// verb of a main clause (adverbial connectives such as `deshalb`).
    pub clause_initial_only: bool,
}

impl ConnectiveLexiconEntry {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.surface.split_whitespace()
    }

    fn len(&self) -> usize {
        self.words().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectiveLexicon {
    /// Sorted longest first so lookups return the longest match.
    entries: Vec<ConnectiveLexiconEntry>,
}

const DEFAULT_TSV: &str = include_str!("../../data/connectives.tsv");

impl ConnectiveLexicon {
    /// The lexicon shipped with the crate.
    pub fn german() -> Self {
        Self::parse(DEFAULT_TSV, "connectives.tsv").expect("bundled lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Tab-separated `surface, relation, clause_initial_only`; `#` comments.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(parse_err(format!("expected 3 tab-separated fields, found {}", fields.len())));
            }
            let surface = fields[0].split_whitespace().collect::<Vec<_>>().join(" ");
            if surface.is_empty() || surface != surface.to_lowercase() {
                return Err(parse_err(format!("surface `{}` must be non-empty lowercase", fields[0])));
            }
            let relation: RelationLabel = fields[1].parse().map_err(|e: Error| parse_err(e.to_string()))?;
            if relation == RelationLabel::None {
                return Err(parse_err("connectives cannot map to `none`".into()));
            }
            let clause_initial_only = match fields[2] {
                "true" => true,
                "false" => false,
                other => return Err(parse_err(format!("expected true/false, found `{other}`"))),
            };
            if !seen.insert(surface.clone()) {
                return Err(Error::Validation(format!(
                    "{origin}:{}: duplicate connective `{surface}`",
                    idx + 1
                )));
            }
            entries.push(ConnectiveLexiconEntry {
                surface,
                relation,
                clause_initial_only,
            });
        }
        entries.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.surface.cmp(&b.surface)));
        Ok(ConnectiveLexicon { entries })
    }

    pub fn entries(&self) -> &[ConnectiveLexiconEntry] {
        &self.entries
    }

    pub fn get(&self, surface: &str) -> Option<&ConnectiveLexiconEntry> {
        self.entries.iter().find(|e| e.surface == surface)
    }

    /// Longest entry whose words match the tokens starting at `at`, with the
    /// number of tokens it spans.
    pub fn longest_match(&self, tokens: &[Token], at: usize) -> Option<(&ConnectiveLexiconEntry, usize)> {
        self.entries.iter().find_map(|entry| {
            let n = entry.len();
            let window = tokens.get(at..at + n)?;
            let hit = window.iter().zip(entry.words()).all(|(t, w)| t.is_word() && t.lower == w);
            hit.then_some((entry, n))
        })
    }
}
