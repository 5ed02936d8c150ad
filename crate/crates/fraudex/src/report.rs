//! Study report: one JSON file plus a CSV per table.

use std::path::Path;

use anyhow::Context;
use fraudex_core::metrics::EvalReport;
use fraudex_core::models::ModelKind;
use serde::{Deserialize, Serialize};

use crate::bench::{AgreementReport, BenchRecord, SensitivityRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub seed: u64,
    pub dataset: String,
    pub git_describe: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub model_kind: ModelKind,
    #[serde(flatten)]
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub table1: Vec<Table1Row>,
    pub agreement: Vec<AgreementReport>,
    pub sensitivity: Vec<SensitivityRow>,
    pub timing: Vec<BenchRecord>,
}

pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Table1Csv {
    model_kind: &'static str,
    precision: f64,
    recall: f64,
    f1: f64,
    auc: Option<f64>,
    macro_precision: f64,
    macro_recall: f64,
    macro_f1: f64,
    tp: usize,
    fp: usize,
    tn: usize,
    fn_: usize,
    n_rows: usize,
}

pub fn write_table1_csv(path: &Path, rows: &[Table1Row]) -> anyhow::Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| {
            let e = &r.report;
            Table1Csv {
                model_kind: r.model_kind.slug(),
                precision: e.precision,
                recall: e.recall,
                f1: e.f1,
                auc: e.auc,
                macro_precision: e.macro_precision,
                macro_recall: e.macro_recall,
                macro_f1: e.macro_f1,
                tp: e.confusion.tp,
                fp: e.confusion.fp,
                tn: e.confusion.tn,
                fn_: e.confusion.fn_,
                n_rows: e.n_rows,
            }
        }),
    )
}

#[derive(Serialize)]
struct AgreementCsv<'a> {
    model_kind: &'static str,
    explainer: &'static str,
    reference: &'a str,
    overlap_at_10: usize,
    rank_footrule: usize,
    top_features: String,
}

pub fn write_agreement_csv(path: &Path, rows: &[AgreementReport]) -> anyhow::Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| AgreementCsv {
            model_kind: r.model_kind.slug(),
            explainer: r.explainer.slug(),
            reference: &r.reference,
            overlap_at_10: r.overlap_at_10,
            rank_footrule: r.rank_footrule,
            top_features: r.top_features.join(";"),
        }),
    )
}

#[derive(Serialize)]
struct SensitivityCsv {
    model_kind: &'static str,
    overlap_at_10: usize,
    rank_footrule: usize,
    stable: bool,
    normal_top: String,
    fraud_top: String,
}

pub fn write_sensitivity_csv(path: &Path, rows: &[SensitivityRow]) -> anyhow::Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| SensitivityCsv {
            model_kind: r.model_kind.slug(),
            overlap_at_10: r.overlap_at_10,
            rank_footrule: r.rank_footrule,
            stable: r.stable,
            normal_top: r.normal_top.join(";"),
            fraud_top: r.fraud_top.join(";"),
        }),
    )
}

#[derive(Serialize)]
struct TimingCsv<'a> {
    model_kind: &'static str,
    explainer: &'static str,
    background_size: Option<usize>,
    wall_seconds: Option<f64>,
    n_repeats: usize,
    instance_id: u64,
    base_value_gap: Option<f64>,
    skipped: Option<&'a str>,
}

pub fn write_timing_csv(path: &Path, rows: &[BenchRecord]) -> anyhow::Result<()> {
    write_rows(
        path,
        rows.iter().map(|r| TimingCsv {
            model_kind: r.model_kind.slug(),
            explainer: r.explainer.slug(),
            background_size: r.background_size,
            wall_seconds: r.wall_seconds,
            n_repeats: r.n_repeats,
            instance_id: r.instance_id,
            base_value_gap: r.base_value_gap,
            skipped: r.skipped.as_deref(),
        }),
    )
}

impl Report {
    /// Writes `report.json` and one CSV per non-empty table into `dir`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        write_json(&dir.join("report.json"), self)?;
        if !self.table1.is_empty() {
            write_table1_csv(&dir.join("table1.csv"), &self.table1)?;
        }
        if !self.agreement.is_empty() {
            write_agreement_csv(&dir.join("agreement.csv"), &self.agreement)?;
        }
        if !self.sensitivity.is_empty() {
            write_sensitivity_csv(&dir.join("sensitivity.csv"), &self.sensitivity)?;
        }
        if !self.timing.is_empty() {
            write_timing_csv(&dir.join("timing.csv"), &self.timing)?;
        }
        Ok(())
    }
}
