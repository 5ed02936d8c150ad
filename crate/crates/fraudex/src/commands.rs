//! The CLI commands as library functions. Everything is written under the
//! configured output directory.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context};
use fraudex_core::data::{encode, fit_schema, generate_synthetic, split, Dataset};
use fraudex_core::explain::{
    global_lr_importance, rank, resolve_background, Attribution, BackgroundSpec, Method, RankedFeatures,
    ResolvedBackground,
};
use fraudex_core::metrics::evaluate_scores;
use fraudex_core::models::{train, ModelKind, ScoreFunction};

use crate::bench::{self, TimingPlan};
use crate::config::{DatasetSource, RunConfig};
use crate::ingest::{load_csv, write_csv, SchemaConfig};
use crate::persist::ModelFile;
use crate::report::{self, git_describe, Meta, Report, Table1Row};

pub struct Prepared {
    pub train: Dataset,
    pub valid: Dataset,
    pub description: String,
}

/// Loads or generates the dataset and applies the stratified holdout split.
/// For CSV input the schema is fitted on the training rows only; row ids
/// are positions in the original file (data rows, 0-based).
pub fn prepare(cfg: &RunConfig) -> anyhow::Result<Prepared> {
    match &cfg.dataset {
        DatasetSource::Synthetic(spec) => {
            let (data, _) = generate_synthetic(spec)?;
            let (train, valid) = split(&data, cfg.holdout, cfg.seed)?;
            let description = format!(
                "synthetic(n_rows={}, n_numeric={}, n_categorical={}, n_informative={}, fraud_rate={}, seed={})",
                spec.n_rows, spec.n_numeric, spec.n_categorical, spec.n_informative, spec.fraud_rate, spec.seed
            );
            Ok(Prepared { train, valid, description })
        }
        DatasetSource::Csv { path, schema } => {
            let config = SchemaConfig::load(schema)?;
            ensure!(config.label().is_some(), "schema config {} declares no label column", schema.display());
            let records = load_csv(path, &config)?;
            ensure!(!records.is_empty(), "{} has no data rows", path.display());
            let decls = config.declarations();
            let provisional = encode(&records, &fit_schema(&records, &decls)?);
            let (train_ids, valid_ids) = {
                let (t, v) = split(&provisional, cfg.holdout, cfg.seed)?;
                (t.row_ids, v.row_ids)
            };
            let pick = |ids: &[u64]| ids.iter().map(|&i| records[i as usize].clone()).collect::<Vec<_>>();
            let (train_records, valid_records) = (pick(&train_ids), pick(&valid_ids));
            let schema = fit_schema(&train_records, &decls)?;
            let mut train = encode(&train_records, &schema);
            let mut valid = encode(&valid_records, &schema);
            train.row_ids = train_ids;
            valid.row_ids = valid_ids;
            Ok(Prepared { train, valid, description: path.display().to_string() })
        }
    }
}

fn models_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.join("models")
}

pub fn model_path(cfg: &RunConfig, kind: ModelKind) -> PathBuf {
    models_dir(cfg).join(format!("{}.json", kind.slug()))
}

fn capture_config(cfg: &RunConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    std::fs::write(cfg.out.join("config.toml"), cfg.effective.to_toml()?)?;
    Ok(())
}

fn table1(models: &[ScoreFunction], valid: &Dataset) -> anyhow::Result<Vec<Table1Row>> {
    let labels = valid.labels()?;
    models
        .iter()
        .map(|sf| {
            let scores = sf.batch_evaluate(valid)?;
            Ok(Table1Row { model_kind: sf.kind, report: evaluate_scores(labels, &scores, sf.threshold)? })
        })
        .collect()
}

fn write_table1(cfg: &RunConfig, rows: &[Table1Row]) -> anyhow::Result<()> {
    report::write_json(&cfg.out.join("table1.json"), &rows)?;
    report::write_table1_csv(&cfg.out.join("table1.csv"), rows)
}

/// Trains every configured model, saves it and reports validation metrics.
pub fn cmd_train(cfg: &RunConfig) -> anyhow::Result<Vec<Table1Row>> {
    let data = prepare(cfg)?;
    capture_config(cfg)?;
    std::fs::create_dir_all(models_dir(cfg))?;
    let mut models = Vec::with_capacity(cfg.models.len());
    for spec in &cfg.models {
        let sf = train(spec, &data.train).with_context(|| format!("training {}", spec.kind()))?;
        ModelFile::new(spec.clone(), data.train.schema.clone(), sf.clone()).save(&model_path(cfg, spec.kind()))?;
        models.push(sf);
    }
    let rows = table1(&models, &data.valid)?;
    write_table1(cfg, &rows)?;
    Ok(rows)
}

/// Loads the configured models, failing with the full list of missing
/// files, and checks they were trained on this dataset's columns.
pub fn load_models(cfg: &RunConfig, data: &Prepared) -> anyhow::Result<Vec<ScoreFunction>> {
    let missing: Vec<String> = cfg
        .models
        .iter()
        .map(|s| model_path(cfg, s.kind()))
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        bail!("missing trained models (run `train` first): {}", missing.join(", "));
    }
    let names = data.train.feature_names();
    cfg.models
        .iter()
        .map(|s| {
            let file = ModelFile::load(&model_path(cfg, s.kind()))?;
            ensure!(
                file.model.feature_names == names,
                "{} was trained on different columns; retrain",
                model_path(cfg, s.kind()).display()
            );
            Ok(file.model)
        })
        .collect()
}

pub fn cmd_evaluate(cfg: &RunConfig) -> anyhow::Result<Vec<Table1Row>> {
    let data = prepare(cfg)?;
    let models = load_models(cfg, &data)?;
    let rows = table1(&models, &data.valid)?;
    write_table1(cfg, &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackgroundChoice {
    All,
    NormalOnly,
    FraudOnly,
}

/// Resolves a background from the training split, subsampled to at most
/// `size` rows.
pub fn background(
    train: &Dataset,
    choice: BackgroundChoice,
    size: usize,
    seed: u64,
) -> anyhow::Result<ResolvedBackground> {
    let (spec, available) = match choice {
        BackgroundChoice::All => (BackgroundSpec::all(), train.n_rows()),
        BackgroundChoice::NormalOnly => (BackgroundSpec::normal_only(), train.positions_with_label(0)?.len()),
        BackgroundChoice::FraudOnly => (BackgroundSpec::fraud_only(), train.positions_with_label(1)?.len()),
    };
    let spec = if available > 0 { spec.sampled(size.min(available), seed) } else { spec };
    Ok(resolve_background(&spec, train)?)
}

fn find_instance(data: &Prepared, id: u64) -> anyhow::Result<Vec<f64>> {
    for set in [&data.valid, &data.train] {
        if let Some(pos) = set.position_of(id) {
            return Ok(set.matrix.row(pos).to_vec());
        }
    }
    bail!("unknown instance id {id}")
}

fn default_instance(cfg: &RunConfig, data: &Prepared) -> anyhow::Result<(u64, Vec<f64>)> {
    match cfg.instance {
        Some(id) => Ok((id, find_instance(data, id)?)),
        None => {
            let (pos, id) = bench::select_fraud_instance(&data.valid, cfg.seed)?;
            Ok((id, data.valid.matrix.row(pos).to_vec()))
        }
    }
}

pub struct Explanation {
    pub instance_id: u64,
    pub attribution: Attribution,
    pub ranked: RankedFeatures,
    pub path: PathBuf,
}

pub fn cmd_explain(
    cfg: &RunConfig,
    model: ModelKind,
    instance: Option<u64>,
    method: Method,
    choice: BackgroundChoice,
) -> anyhow::Result<Explanation> {
    let data = prepare(cfg)?;
    let file = ModelFile::load(&model_path(cfg, model))?;
    ensure!(file.model.feature_names == data.train.feature_names(), "model was trained on different columns");
    let (instance_id, x) = match instance {
        Some(id) => (id, find_instance(&data, id)?),
        None => default_instance(cfg, &data)?,
    };
    let bg = match method {
        Method::Lime => ResolvedBackground::from_rows(fraudex_core::Matrix::zeros(0, x.len())),
        _ => background(&data.train, choice, cfg.background_size, cfg.seed)?,
    };
    let attribution = bench::explain(&file.model, method, &x, &bg, &data.train, &cfg.explain)?;
    let ranked = rank(&attribution, cfg.explain.top_k);
    let dir = cfg.out.join("explanations");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{}_{}_{instance_id}.json", model.slug(), method.slug()));
    report::write_json(&path, &attribution)?;
    Ok(Explanation { instance_id, attribution, ranked, path })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StudyKind {
    Agreement,
    Sensitivity,
    Timing,
    All,
}

pub fn cmd_study(cfg: &RunConfig, which: StudyKind) -> anyhow::Result<Report> {
    let data = prepare(cfg)?;
    let models = load_models(cfg, &data)?;
    let (instance_id, x) = default_instance(cfg, &data)?;
    let wants = |k| which == k || which == StudyKind::All;
    let k = cfg.explain.top_k;
    let mut report = Report {
        meta: Meta { seed: cfg.seed, dataset: data.description.clone(), git_describe: git_describe() },
        table1: table1(&models, &data.valid)?,
        agreement: Vec::new(),
        sensitivity: Vec::new(),
        timing: Vec::new(),
    };
    if wants(StudyKind::Agreement) {
        let lr = models
            .iter()
            .find(|m| m.kind == ModelKind::LogisticRegression)
            .context("the agreement study needs a trained logistic_regression model")?;
        let reference = global_lr_importance(lr, &data.train, k)?;
        let bg = background(&data.train, BackgroundChoice::All, cfg.background_size, cfg.seed)?;
        let explainers: &[Method] =
            if cfg.studies.lime { &[Method::KernelShap, Method::Lime] } else { &[Method::KernelShap] };
        report.agreement =
            bench::run_agreement_study(&models, explainers, &x, &bg, &data.train, &reference, &cfg.explain)?;
    }
    if wants(StudyKind::Sensitivity) {
        let n_fraud = data.train.positions_with_label(1)?.len();
        let n_normal = data.train.positions_with_label(0)?.len();
        let size = cfg.background_size.min(n_fraud).min(n_normal);
        let normal = background(&data.train, BackgroundChoice::NormalOnly, size, cfg.seed)?;
        let fraud = background(&data.train, BackgroundChoice::FraudOnly, size, cfg.seed)?;
        report.sensitivity = bench::run_sensitivity_study(&models, &x, &normal, &fraud, &cfg.explain, k)?;
    }
    if wants(StudyKind::Timing) {
        let plan = TimingPlan {
            sizes: &cfg.studies.timing_sizes,
            lime_enabled: cfg.studies.lime,
            repeats: cfg.studies.timing_repeats,
            background_seed: cfg.seed,
        };
        report.timing = bench::run_timing_study(&models, &x, instance_id, &data.train, &plan, &cfg.explain);
    }
    report.write(&cfg.out)?;
    Ok(report)
}

/// Writes the configured synthetic dataset as CSV plus schema config and
/// the generating weights.
pub fn cmd_synth(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let DatasetSource::Synthetic(spec) = &cfg.dataset else {
        bail!("`synth` needs a synthetic dataset configuration");
    };
    let (data, weights) = generate_synthetic(spec)?;
    std::fs::create_dir_all(&cfg.out)?;
    let csv_path = cfg.out.join("synthetic.csv");
    write_csv(&data, &csv_path, &cfg.out.join("synthetic.schema"))?;
    report::write_json(&cfg.out.join("generative_weights.json"), &weights)?;
    Ok(csv_path)
}
