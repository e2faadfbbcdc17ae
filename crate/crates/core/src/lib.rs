//! Measures implicit-causality discourse biases in language-model
//! continuations of German prompts: item designs, generation clients, a
//! rule-based annotator, mixed-effects statistics and report emission.

pub mod annotate;
pub mod config;
pub mod design;
pub mod error;
pub mod genclient;
pub mod pipeline;
pub mod report;
pub mod stage;
pub mod stats;

pub use error::{Error, Result};
