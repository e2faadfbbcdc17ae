//! Deterministic report files: `table.csv`, `fits.json`, `plotdata.csv`
//! and `exclusions.csv` under `<root>/<model_id>/<experiment>/`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{stars, ExperimentReport, PlotData};
use crate::config::Seeds;
use crate::error::{Error, Result};
use crate::stage::{write_atomic, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportMeta {
    pub model_id: String,
    pub seeds: Seeds,
    pub config_hash: String,
}

impl ReportMeta {
    fn comment(&self, report: &ExperimentReport) -> String {
        let a = &report.accounting;
        let excluded: Vec<String> = a.excluded.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        format!(
            "# schema_version={SCHEMA_VERSION} model_id={} experiment={} seeds=pairing:{},bootstrap:{},decode:{} config_hash={} total={} included={} excluded={}\n",
            self.model_id,
            report.experiment,
            self.seeds.pairing,
            self.seeds.bootstrap,
            self.seeds.decode,
            self.config_hash,
            a.total,
            a.included,
            if excluded.is_empty() { "-".to_string() } else { excluded.join(",") }
        )
    }
}

/// Six decimals; missing and non-finite values become `NA`.
fn num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => {
            let s = format!("{v:.6}");
            if s == "-0.000000" {
                "0.000000".to_string()
            } else {
                s
            }
        }
        _ => "NA".to_string(),
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_body(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Validation(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(to_err)?;
    for r in rows {
        w.write_record(&r).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields is utf-8"))
}

pub fn table_csv(report: &ExperimentReport, meta: &ReportMeta) -> Result<String> {
    let rows = report
        .cells
        .iter()
        .map(|c| {
            vec![
                report.experiment.to_string(),
                c.step.clone(),
                c.subset.clone(),
                c.statistic_name.clone(),
                num(c.statistic),
                opt(c.df),
                num(c.p_value),
                c.p_one_tailed.map(|p| num(Some(p))).unwrap_or_default(),
                num(c.estimate),
                c.p_value.map(stars).unwrap_or_default().to_string(),
                c.mark.map(|m| m.as_str()).unwrap_or_default().to_string(),
                c.reference.clone().unwrap_or_default(),
                c.reference_value.map(|v| num(Some(v))).unwrap_or_default(),
                c.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let body = csv_body(
        &[
            "experiment",
            "step",
            "subset",
            "statistic_name",
            "statistic",
            "df",
            "p_value",
            "p_one_tailed",
            "estimate",
            "significance",
            "mark",
            "reference",
            "reference_value",
            "note",
        ],
        rows,
    )?;
    Ok(meta.comment(report) + &body)
}

pub fn plot_csv(report: &ExperimentReport, meta: &ReportMeta) -> Result<String> {
    let body = match &report.plot {
        PlotData::Bias(table) => csv_body(
            &["verb", "verb_class", "bias_type", "proportion_subject", "ci_low", "ci_high", "n"],
            table
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.verb.clone(),
                        r.verb_class.code().to_string(),
                        r.bias_type.code().to_string(),
                        num(Some(r.proportion_subject)),
                        num(Some(r.ci_low)),
                        num(Some(r.ci_high)),
                        r.n.to_string(),
                    ]
                })
                .collect(),
        )?,
        PlotData::Relations(rows) | PlotData::Forms(rows) => csv_body(
            &["verb_class", "focus", "category", "count", "proportion"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.verb_class.code().to_string(),
                        r.focus.map(|f| f.code()).unwrap_or("all").to_string(),
                        r.category.clone(),
                        r.count.to_string(),
                        num(Some(r.proportion)),
                    ]
                })
                .collect(),
        )?,
    };
    Ok(meta.comment(report) + &body)
}

pub fn exclusions_csv(report: &ExperimentReport, meta: &ReportMeta) -> Result<String> {
    let body = csv_body(
        &["prompt_id", "rank", "reason"],
        report
            .exclusions
            .iter()
            .map(|e| vec![e.prompt_id.clone(), e.rank.to_string(), e.reason.clone()])
            .collect(),
    )?;
    Ok(meta.comment(report) + &body)
}

#[derive(Serialize)]
struct FitsDocument<'a> {
    schema_version: u32,
    #[serde(flatten)]
    meta: &'a ReportMeta,
    experiment: String,
    accounting: &'a super::Accounting,
    cells: &'a [super::StatCell],
    fits: &'a [super::StepFits],
}

pub fn fits_json(report: &ExperimentReport, meta: &ReportMeta) -> Result<String> {
    let doc = FitsDocument {
        schema_version: SCHEMA_VERSION,
        meta,
        experiment: report.experiment.to_string(),
        accounting: &report.accounting,
        cells: &report.cells,
        fits: &report.fits,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

/// Writes the four report files and returns their directory.
pub fn emit(report: &ExperimentReport, meta: &ReportMeta, root: &Path) -> Result<PathBuf> {
    let dir = root.join(&meta.model_id).join(report.experiment.as_str());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_atomic(&dir.join("table.csv"), table_csv(report, meta)?.as_bytes())?;
    write_atomic(&dir.join("fits.json"), fits_json(report, meta)?.as_bytes())?;
    write_atomic(&dir.join("plotdata.csv"), plot_csv(report, meta)?.as_bytes())?;
    write_atomic(&dir.join("exclusions.csv"), exclusions_csv(report, meta)?.as_bytes())?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(Some(1.0 / 3.0)), "0.333333");
        assert_eq!(num(Some(-1e-9)), "0.000000");
        assert_eq!(num(Some(f64::NAN)), "NA");
        assert_eq!(num(None), "NA");
    }
}
