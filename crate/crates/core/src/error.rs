use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("backend transport failed: {0}")]
    Transport(String),

    /// The backend cannot honour one of the requested decoding parameters.
    #[error("backend does not support `{field}`: {detail}")]
    Capability { field: String, detail: String },

    /// Sampling gave up; `collected` records were produced before stopping.
    #[error("cells below target after {attempts} rounds ({collected} records collected): {}", format_deficits(.deficits))]
    Starvation {
        attempts: usize,
        collected: usize,
        deficits: Vec<(String, usize)>,
    },

    #[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
    Rank { rank: usize, columns: usize },

    #[error("models are not nested: {0}")]
    NotNested(String),

    #[error("refusing to compare unconverged fit: {0}")]
    Unconverged(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("missing upstream stage `{stage}`: {path}")]
    MissingStage { stage: String, path: PathBuf },

    #[error("formula error: {0}")]
    Formula(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_deficits(deficits: &[(String, usize)]) -> String {
    deficits
        .iter()
        .map(|(cell, missing)| format!("{cell} (-{missing})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Transport(_) => "transport",
            Error::Capability { .. } => "capability",
            Error::Starvation { .. } => "starvation",
            Error::Rank { .. } => "rank",
            Error::NotNested(_) => "not_nested",
            Error::Unconverged(_) => "unconverged",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::MissingStage { .. } => "dependency",
            Error::Formula(_) => "formula",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
