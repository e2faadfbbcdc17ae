#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn fixtures() -> PathBuf {
    workspace().join("fixtures")
}

pub fn bundled_data(file: &str) -> PathBuf {
    workspace().join("crates/core/data").join(file)
}

pub fn icbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icbench"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

pub fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("summary is JSON")
}

pub fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("JSON error line");
    serde_json::from_str(line).expect("error is JSON")
}

fn toml_path(p: &Path) -> String {
    p.display().to_string().replace('\\', "/")
}

/// Config for the bundled lexicons, unscreened, writing under `dir`.
pub fn bundled_config(dir: &Path) -> PathBuf {
    let text = format!(
        r#"model_id = "bundled"

[backend]
kind = "replay"

[paths]
verbs = "{}"
names = "{}"
output_dir = "{}"
"#,
        toml_path(&bundled_data("verbs.txt")),
        toml_path(&bundled_data("names.txt")),
        toml_path(&dir.join("out")),
    );
    let path = dir.join("bundled.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// The packaged replay config with absolute paths and fast retries,
/// writing under `dir`.
pub fn fixture_config(dir: &Path) -> PathBuf {
    let fx = fixtures();
    let mut text = std::fs::read_to_string(fx.join("run.toml")).unwrap();
    for (key, file) in [("verbs", "verbs.txt"), ("names", "names.txt"), ("replay_dir", "replay"), ("gold", "gold.jsonl")] {
        text = text.replace(&format!("{key} = \"{file}\""), &format!("{key} = \"{}\"", toml_path(&fx.join(file))));
    }
    text = text.replace("output_dir = \"out\"", &format!("output_dir = \"{}\"", toml_path(&dir.join("out"))));
    text = text.replace("concurrency = 4", "concurrency = 4\nretry_attempts = 2\nretry_base_ms = 1\ntimeout_secs = 2");
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Every file under `root` with its bytes, keyed by relative path.
pub fn snapshot(root: &Path) -> std::collections::BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut std::collections::BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = std::collections::BTreeMap::new();
    if root.exists() {
        walk(root, root, &mut out);
    }
    out
}

/// Data records in a stage file (the first line is its header).
pub fn stage_records(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().skip(1).filter(|l| !l.trim().is_empty()).count()
}
