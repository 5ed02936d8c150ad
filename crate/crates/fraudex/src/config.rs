//! Run configuration (TOML).
//!
//! Precedence: command-line flags, then the config file, then built-in
//! defaults. Relative paths in the file are resolved against the file's
//! directory. Validation reports every problem at once.
//!
//! ```toml
//! seed = 7
//! out = "runs/synthetic"
//!
//! [dataset]
//! kind = "synthetic"        # or "csv" with `path` and `schema`
//! n_rows = 10000
//!
//! [[models]]
//! kind = "gradient_boosting"
//! params = { n_estimators = 50 }
//!
//! [explain]
//! n_coalitions = "full"     # or an integer; default 2M + 2048
//! ```

use std::path::{Path, PathBuf};

use anyhow::Context;
use fraudex_core::data::SyntheticSpec;
use fraudex_core::explain::CoalitionBudget;
use fraudex_core::models::{Hyperparameters, ModelKind, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::bench::ExplainSettings;

#[derive(Debug, thiserror::Error)]
#[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
pub struct ConfigErrors(pub Vec<String>);

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<ModelEntry>,
    #[serde(default)]
    pub explain: ExplainConfig,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default)]
    pub studies: StudyConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// `synthetic` or `csv`.
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    pub n_rows: usize,
    pub n_numeric: usize,
    pub n_categorical: usize,
    pub n_informative: usize,
    pub fraud_rate: f64,
    pub holdout: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            kind: "synthetic".into(),
            path: None,
            schema: None,
            n_rows: 10_000,
            n_numeric: 16,
            n_categorical: 4,
            n_informative: 5,
            fraud_rate: 0.035,
            holdout: 0.2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub class_weighted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoalitionSetting {
    Count(usize),
    Word(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_coalitions: Option<CoalitionSetting>,
    pub n_perturbations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_width: Option<f64>,
    pub top_k: usize,
    /// Row id of the explained instance; default is a seed-selected fraud
    /// row from the validation split.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<u64>,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self { n_coalitions: None, n_perturbations: 5000, kernel_width: None, top_k: 10, instance: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundConfig {
    /// Rows sampled (without replacement) from the training split. Clamped
    /// to the rows available.
    pub size: usize,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        Self { size: 600 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub timing_sizes: Vec<usize>,
    pub timing_repeats: usize,
    pub lime: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self { timing_sizes: vec![600, 1000, 4000], timing_repeats: 3, lime: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    Csv { path: PathBuf, schema: PathBuf },
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub dataset: DatasetSource,
    pub holdout: f64,
    pub models: Vec<ModelSpec>,
    pub explain: ExplainSettings,
    pub instance: Option<u64>,
    pub background_size: usize,
    pub studies: StudyConfig,
    /// Effective configuration (flags applied, paths resolved), written
    /// into the output directory for provenance.
    pub effective: FileConfig,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.dataset.path, &mut cfg.dataset.schema].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.out {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(mut self, overrides: &Overrides) -> Result<RunConfig, ConfigErrors> {
        if overrides.seed.is_some() {
            self.seed = overrides.seed;
        }
        if overrides.out.is_some() {
            self.out = overrides.out.clone();
        }
        let mut errors = Vec::new();
        let seed = self.seed.unwrap_or_else(|| {
            errors.push("`seed` is required (set it in the config or pass --seed)".into());
            0
        });
        let out = self.out.clone().unwrap_or_else(|| PathBuf::from("fraudex-out"));

        let d = &self.dataset;
        if !(d.holdout > 0.0 && d.holdout < 1.0) {
            errors.push(format!("dataset.holdout must be in (0, 1), got {}", d.holdout));
        }
        let dataset = match d.kind.as_str() {
            "synthetic" => {
                if d.n_numeric + d.n_categorical == 0 {
                    errors.push("synthetic dataset needs at least one feature".into());
                }
                if !(d.fraud_rate > 0.0 && d.fraud_rate < 0.5) {
                    errors.push(format!("dataset.fraud_rate must be in (0, 0.5), got {}", d.fraud_rate));
                }
                if d.n_informative > d.n_numeric + d.n_categorical {
                    errors.push("dataset.n_informative exceeds the number of features".into());
                }
                let spec = SyntheticSpec::new(d.n_rows, d.n_numeric, d.n_categorical, d.fraud_rate, seed)
                    .with_informative(d.n_informative);
                DatasetSource::Synthetic(spec)
            }
            "csv" => {
                let mut check = |p: &Option<PathBuf>, key: &str| match p {
                    None => {
                        errors.push(format!("dataset.{key} is required for csv datasets"));
                        PathBuf::new()
                    }
                    Some(p) if !p.exists() => {
                        errors.push(format!("dataset.{key} `{}` does not exist", p.display()));
                        p.clone()
                    }
                    Some(p) => p.clone(),
                };
                let path = check(&d.path, "path");
                let schema = check(&d.schema, "schema");
                DatasetSource::Csv { path, schema }
            }
            other => {
                errors.push(format!("dataset.kind must be `synthetic` or `csv`, got `{other}`"));
                DatasetSource::Csv { path: PathBuf::new(), schema: PathBuf::new() }
            }
        };

        let mut models = Vec::new();
        if self.models.is_empty() {
            models.extend(ModelKind::ALL.iter().map(|&k| ModelSpec::new(k, seed)));
        }
        for (i, entry) in self.models.iter().enumerate() {
            match model_spec(entry, seed) {
                Ok(spec) => {
                    if models.iter().any(|m: &ModelSpec| m.kind() == spec.kind()) {
                        errors.push(format!("models[{i}]: `{}` listed twice", spec.kind()));
                    }
                    models.push(spec);
                }
                Err(e) => errors.push(format!("models[{i}]: {e}")),
            }
        }

        let e = &self.explain;
        let n_coalitions = match &e.n_coalitions {
            None => None,
            Some(CoalitionSetting::Count(n)) => Some(CoalitionBudget::Samples(*n)),
            Some(CoalitionSetting::Word(w)) if w == "full" => Some(CoalitionBudget::Full),
            Some(CoalitionSetting::Word(w)) => {
                errors.push(format!("explain.n_coalitions must be an integer or \"full\", got \"{w}\""));
                None
            }
        };
        if e.top_k == 0 {
            errors.push("explain.top_k must be positive".into());
        }
        if e.n_perturbations < 2 {
            errors.push("explain.n_perturbations must be at least 2".into());
        }
        if e.kernel_width.is_some_and(|w| !(w > 0.0)) {
            errors.push("explain.kernel_width must be positive".into());
        }
        if self.background.size == 0 {
            errors.push("background.size must be positive".into());
        }
        if self.studies.timing_repeats == 0 {
            errors.push("studies.timing_repeats must be positive".into());
        }
        if !errors.is_empty() {
            return Err(ConfigErrors(errors));
        }
        let explain = ExplainSettings {
            n_coalitions,
            n_perturbations: e.n_perturbations,
            kernel_width: e.kernel_width,
            top_k: e.top_k,
            seed,
        };
        self.seed = Some(seed);
        self.out = Some(out.clone());
        Ok(RunConfig {
            seed,
            out,
            dataset,
            holdout: self.dataset.holdout,
            models,
            explain,
            instance: self.explain.instance,
            background_size: self.background.size,
            studies: self.studies.clone(),
            effective: self,
        })
    }
}

fn model_spec(entry: &ModelEntry, run_seed: u64) -> Result<ModelSpec, String> {
    let kind: ModelKind = entry.kind.parse().map_err(|e| format!("{e}"))?;
    let table = entry.params.clone().unwrap_or_default();
    let value = toml::Value::Table(table);
    let bad = |e: toml::de::Error| format!("{kind} params: {}", e.message());
    let params = match kind {
        ModelKind::NaiveBayes => Hyperparameters::NaiveBayes(value.try_into().map_err(bad)?),
        ModelKind::LogisticRegression => Hyperparameters::LogisticRegression(value.try_into().map_err(bad)?),
        ModelKind::DecisionTree => Hyperparameters::DecisionTree(value.try_into().map_err(bad)?),
        ModelKind::RandomForest => Hyperparameters::RandomForest(value.try_into().map_err(bad)?),
        ModelKind::GradientBoosting => Hyperparameters::GradientBoosting(value.try_into().map_err(bad)?),
        ModelKind::NeuralNetwork => Hyperparameters::NeuralNetwork(value.try_into().map_err(bad)?),
        ModelKind::Autoencoder => Hyperparameters::Autoencoder(value.try_into().map_err(bad)?),
        ModelKind::IsolationForest => Hyperparameters::IsolationForest(value.try_into().map_err(bad)?),
    };
    // The parameter structs fill defaults for absent keys; catch typos by
    // checking every given key survives a round trip.
    let known = match toml::Value::try_from(&params).map_err(|e| e.to_string())? {
        toml::Value::Table(t) => t.into_iter().next().map(|(_, v)| v),
        _ => None,
    };
    let known_keys: Vec<String> = match known {
        Some(toml::Value::Table(t)) => t.keys().cloned().collect(),
        _ => Vec::new(),
    };
    let unknown: Vec<&String> =
        entry.params.iter().flat_map(|t| t.keys()).filter(|k| !known_keys.contains(k)).collect();
    if !unknown.is_empty() {
        return Err(format!("{kind} params: unknown keys {unknown:?}"));
    }
    let mut spec = ModelSpec::with_params(params, entry.seed.unwrap_or(run_seed));
    spec.class_weighted = entry.class_weighted;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_need_only_a_seed() {
        let cfg = FileConfig::default().validate(&Overrides { seed: Some(3), out: None }).unwrap();
        assert_eq!(cfg.models.len(), 8);
        assert_eq!(cfg.holdout, 0.2);
        assert!(matches!(cfg.dataset, DatasetSource::Synthetic(ref s) if s.seed == 3));
    }

    #[test]
    fn errors_are_collected() {
        let text = r#"
            [dataset]
            kind = "csv"
            path = "/definitely/missing.csv"
            holdout = 1.5
            [[models]]
            kind = "gradient_boosting"
            params = { n_trees = 5 }
            [[models]]
            kind = "svm"
            [explain]
            n_coalitions = "many"
        "#;
        let cfg: FileConfig = toml::from_str(text).unwrap();
        let ConfigErrors(errors) = cfg.validate(&Overrides::default()).unwrap_err();
        assert_eq!(errors.len(), 7, "{errors:#?}");
        assert!(errors[0].contains("seed"));
    }

    #[test]
    fn flags_override_file_values() {
        let cfg: FileConfig = toml::from_str("seed = 1\nout = \"a\"\n[explain]\nn_coalitions = 300").unwrap();
        let run = cfg.validate(&Overrides { seed: Some(9), out: Some("b".into()) }).unwrap();
        assert_eq!((run.seed, run.out.as_path()), (9, Path::new("b")));
        assert_eq!(run.explain.n_coalitions, Some(CoalitionBudget::Samples(300)));
        let again: FileConfig = toml::from_str(&run.effective.to_toml().unwrap()).unwrap();
        assert_eq!(again.seed, Some(9));
    }

    #[test]
    fn model_params_are_typed() {
        let cfg: FileConfig =
            toml::from_str("seed = 1\n[[models]]\nkind = \"random_forest\"\nparams = { n_estimators = 7 }").unwrap();
        let run = cfg.validate(&Overrides::default()).unwrap();
        assert!(matches!(&run.models[0].params, Hyperparameters::RandomForest(p) if p.n_estimators == 7));
    }
}
