mod common;

use common::*;

#[test]
fn design_emits_the_full_factorial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled_config(dir.path());
    let out = icbench(&["design", "-c", cfg.to_str().unwrap(), "-e", "E1", "-e", "E2"]);
    let summary = stdout_json(&out);
    let e1 = summary["E1"].as_str().unwrap();
    let e2 = summary["E2"].as_str().unwrap();
    assert_eq!(stage_records(e1.as_ref()), 6080);
    assert_eq!(stage_records(e2.as_ref()), 3040);
    assert!(summary.get("E3").is_none());
}

#[test]
fn missing_stage_exits_with_dependency_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled_config(dir.path());
    let out = icbench(&["annotate", "-c", cfg.to_str().unwrap(), "-e", "E1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "dependency");
    assert_eq!(err["error"]["stage"], "design");
    assert!(err["error"]["path"].as_str().unwrap().ends_with("design.jsonl"));
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_config_is_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "model_id = \"has space\"\n[backend]\nkind = \"replay\"\n[paths]\nverbs = \"v\"\nnames = \"n\"\noutput_dir = \"o\"\n").unwrap();
    let out = icbench(&["design", "-c", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "validation");

    let out = icbench(&["design", "-c", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "io");
}

#[test]
fn unreachable_backend_leaves_stages_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    stdout_json(&icbench(&["all", "-c", cfg]));
    let before = snapshot(&dir.path().join("out"));
    assert!(!before.is_empty());

    // nothing listens on the discard port
    let out = icbench(&["generate", "-c", cfg, "-e", "E2", "--backend", "http://127.0.0.1:9/v1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "transport");
    assert_eq!(snapshot(&dir.path().join("out")), before);
}

#[test]
fn stages_run_one_at_a_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let screened = stdout_json(&icbench(&["screen-names", "-c", cfg]));
    assert_eq!(screened["screened"].as_array().unwrap().len(), 8);
    stdout_json(&icbench(&["design", "-c", cfg, "-e", "E3"]));
    stdout_json(&icbench(&["generate", "-c", cfg, "-e", "E3"]));
    stdout_json(&icbench(&["annotate", "-c", cfg, "-e", "E3"]));
    let analyzed = stdout_json(&icbench(&["analyze", "-c", cfg, "-e", "E3"]));
    let report_dir = std::path::PathBuf::from(analyzed["E3"].as_str().unwrap());
    for f in ["table.csv", "fits.json", "plotdata.csv", "exclusions.csv"] {
        assert_eq!(
            std::fs::read(report_dir.join(f)).unwrap(),
            std::fs::read(fixtures().join("golden/replay-tiny/E3").join(f)).unwrap(),
            "{f}"
        );
    }
    let agree = stdout_json(&icbench(&["agree", "-c", cfg]));
    assert_eq!(agree["items"], 200);
    assert!(agree["coref_kappa"].as_f64().unwrap() >= 0.9);
}

#[test]
fn output_dir_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled_config(dir.path());
    let elsewhere = dir.path().join("elsewhere");
    let out = icbench(&["design", "-c", cfg.to_str().unwrap(), "-e", "E2", "--output-dir", elsewhere.to_str().unwrap()]);
    let summary = stdout_json(&out);
    assert!(summary["E2"].as_str().unwrap().starts_with(elsewhere.to_str().unwrap()));
    assert!(!dir.path().join("out").exists());
}
