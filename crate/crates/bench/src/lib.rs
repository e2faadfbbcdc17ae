//! Benchmark inputs shared by the criterion targets.

use icbench_core::design::{load_name_lexicon, load_verb_lexicon, NameEntry, VerbEntry};
use std::path::PathBuf;

pub fn bundled_data(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(file)
}

pub fn bundled_verbs() -> Vec<VerbEntry> {
    load_verb_lexicon(bundled_data("verbs.txt")).expect("bundled verbs")
}

pub fn bundled_names() -> Vec<NameEntry> {
    load_name_lexicon(bundled_data("names.txt")).expect("bundled names")
}
