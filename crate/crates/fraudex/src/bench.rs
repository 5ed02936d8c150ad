//! The three experiments: agreement with logistic-regression weights,
//! background sensitivity, and explanation run time versus background size.

use std::time::Instant;

use fraudex_core::data::Dataset;
use fraudex_core::explain::{
    kernel_shap, lime, rank, resolve_background, Attribution, BackgroundSpec, CoalitionBudget, KernelShapConfig,
    LimeConfig, Method, RankedFeatures, ResolvedBackground,
};
use fraudex_core::math::{mean, median};
use fraudex_core::models::{ModelKind, ScoreFunction, ScoreSemantics};
use fraudex_core::rng;
use serde::{Deserialize, Serialize};

/// Sensitivity rows with at least this many shared top-10 features are
/// labelled stable.
pub const STABLE_OVERLAP: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("rankings have different k ({0} vs {1})")]
    MismatchedK(usize, usize),
    #[error("{method} explanation of {model} failed")]
    Explain {
        model: ModelKind,
        method: Method,
        #[source]
        source: fraudex_core::Error,
    },
    #[error(transparent)]
    Core(#[from] fraudex_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplainSettings {
    /// `None` means the default `2M + 2048` sampled coalitions.
    pub n_coalitions: Option<CoalitionBudget>,
    pub n_perturbations: usize,
    pub kernel_width: Option<f64>,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        Self { n_coalitions: None, n_perturbations: 5000, kernel_width: None, top_k: 10, seed: 0 }
    }
}

impl ExplainSettings {
    pub fn kernel_config(&self, n_features: usize) -> KernelShapConfig {
        match self.n_coalitions {
            Some(budget) => KernelShapConfig { budget, seed: self.seed },
            None => KernelShapConfig::default_for(n_features, self.seed),
        }
    }

    pub fn lime_config(&self) -> LimeConfig {
        LimeConfig {
            n_perturbations: self.n_perturbations,
            kernel_width: self.kernel_width,
            top_k: self.top_k,
            seed: self.seed,
            ..LimeConfig::default()
        }
    }
}

/// Runs one explainer. LIME perturbs around `train`; SHAP masks with
/// `background`.
pub fn explain(
    sf: &ScoreFunction,
    method: Method,
    instance: &[f64],
    background: &ResolvedBackground,
    train: &Dataset,
    settings: &ExplainSettings,
) -> Result<Attribution, BenchError> {
    let result = match method {
        Method::KernelShap => kernel_shap(sf, instance, background, &settings.kernel_config(sf.n_features())),
        Method::Lime => lime(sf, instance, train, &settings.lime_config()),
        Method::ExactShapley => fraudex_core::explain::exact_shapley(sf, instance, background),
    };
    result.map_err(|source| BenchError::Explain { model: sf.kind, method, source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub overlap: usize,
    /// Spearman footrule over the shared features: `Σ |rank_a - rank_b|`.
    /// Not part of the original comparison; reported as a diagnostic.
    pub footrule: usize,
}

pub fn agreement(a: &RankedFeatures, b: &RankedFeatures) -> Result<Overlap, BenchError> {
    if a.k != b.k {
        return Err(BenchError::MismatchedK(a.k, b.k));
    }
    let mut overlap = 0;
    let mut footrule = 0;
    for ea in &a.entries {
        if let Some(eb) = b.entries.iter().find(|eb| eb.feature_index == ea.feature_index) {
            overlap += 1;
            footrule += ea.rank.abs_diff(eb.rank);
        }
    }
    Ok(Overlap { overlap, footrule })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub model_kind: ModelKind,
    pub explainer: Method,
    /// `lr_global`, or `<model>:<explainer>` for cross-model comparisons.
    pub reference: String,
    pub overlap_at_10: usize,
    pub rank_footrule: usize,
    pub top_features: Vec<String>,
}

/// One report per (model, explainer) against the logistic-regression
/// global ranking, plus isolation forest against the autoencoder when both
/// are present. LIME is only run on probability models.
#[allow(clippy::too_many_arguments)]
pub fn run_agreement_study(
    models: &[ScoreFunction],
    explainers: &[Method],
    instance: &[f64],
    background: &ResolvedBackground,
    train: &Dataset,
    lr_reference: &RankedFeatures,
    settings: &ExplainSettings,
) -> Result<Vec<AgreementReport>, BenchError> {
    let k = lr_reference.k;
    let mut reports = Vec::new();
    let mut shap_rankings: Vec<(ModelKind, RankedFeatures)> = Vec::new();
    for sf in models {
        for &method in explainers {
            if method == Method::Lime && sf.semantics != ScoreSemantics::FraudProbability {
                continue;
            }
            let attr = explain(sf, method, instance, background, train, settings)?;
            let ranked = rank(&attr, k);
            let o = agreement(&ranked, lr_reference)?;
            reports.push(AgreementReport {
                model_kind: sf.kind,
                explainer: method,
                reference: "lr_global".into(),
                overlap_at_10: o.overlap,
                rank_footrule: o.footrule,
                top_features: ranked.names().into_iter().map(String::from).collect(),
            });
            if method == Method::KernelShap {
                shap_rankings.push((sf.kind, ranked));
            }
        }
    }
    let find = |kind| shap_rankings.iter().find(|(k, _)| *k == kind).map(|(_, r)| r);
    if let (Some(ae), Some(iso)) = (find(ModelKind::Autoencoder), find(ModelKind::IsolationForest)) {
        let o = agreement(iso, ae)?;
        reports.push(AgreementReport {
            model_kind: ModelKind::IsolationForest,
            explainer: Method::KernelShap,
            reference: format!("{}:{}", ModelKind::Autoencoder.slug(), Method::KernelShap),
            overlap_at_10: o.overlap,
            rank_footrule: o.footrule,
            top_features: iso.names().into_iter().map(String::from).collect(),
        });
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub model_kind: ModelKind,
    pub overlap_at_10: usize,
    pub rank_footrule: usize,
    pub stable: bool,
    pub normal_top: Vec<String>,
    pub fraud_top: Vec<String>,
}

/// Overlap between KernelSHAP rankings under a normal-only and a
/// fraud-only background. Both runs share the coalition seed.
pub fn run_sensitivity_study(
    models: &[ScoreFunction],
    instance: &[f64],
    normal: &ResolvedBackground,
    fraud: &ResolvedBackground,
    settings: &ExplainSettings,
    k: usize,
) -> Result<Vec<SensitivityRow>, BenchError> {
    models
        .iter()
        .map(|sf| {
            let config = settings.kernel_config(sf.n_features());
            let run = |bg| {
                kernel_shap(sf, instance, bg, &config)
                    .map(|a| rank(&a, k))
                    .map_err(|source| BenchError::Explain { model: sf.kind, method: Method::KernelShap, source })
            };
            let (a, b) = (run(normal)?, run(fraud)?);
            let o = agreement(&a, &b)?;
            Ok(SensitivityRow {
                model_kind: sf.kind,
                overlap_at_10: o.overlap,
                rank_footrule: o.footrule,
                stable: o.overlap >= STABLE_OVERLAP,
                normal_top: a.names().into_iter().map(String::from).collect(),
                fraud_top: b.names().into_iter().map(String::from).collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub model_kind: ModelKind,
    pub explainer: Method,
    pub background_size: Option<usize>,
    /// Median wall time of the timed runs; `None` when skipped.
    pub wall_seconds: Option<f64>,
    pub n_repeats: usize,
    pub instance_id: u64,
    /// `|base_value - mean training score|`: how well the background's
    /// expected score matches the model's average output.
    pub base_value_gap: Option<f64>,
    pub skipped: Option<String>,
}

pub struct TimingPlan<'a> {
    pub sizes: &'a [usize],
    pub lime_enabled: bool,
    pub repeats: usize,
    pub background_seed: u64,
}

/// Times SHAP per background size and LIME once per model. Each cell gets
/// one warm-up run and then `repeats` timed runs; background resolution and
/// the reference mean are computed outside the timer. Infeasible cells
/// yield records with a `skipped` reason instead of failing the study.
pub fn run_timing_study(
    models: &[ScoreFunction],
    instance: &[f64],
    instance_id: u64,
    train: &Dataset,
    plan: &TimingPlan<'_>,
    settings: &ExplainSettings,
) -> Vec<BenchRecord> {
    let mut records = Vec::new();
    for sf in models {
        let model_mean = sf.batch_evaluate(train).map(|s| mean(&s)).ok();
        let record = |explainer, background_size| BenchRecord {
            model_kind: sf.kind,
            explainer,
            background_size,
            wall_seconds: None,
            n_repeats: plan.repeats,
            instance_id,
            base_value_gap: None,
            skipped: None,
        };
        for &s in plan.sizes {
            let mut rec = record(Method::KernelShap, Some(s));
            if s > train.n_rows() {
                rec.skipped = Some(format!("background of {s} rows needs more than the {} available", train.n_rows()));
                records.push(rec);
                continue;
            }
            let background = match resolve_background(&BackgroundSpec::subsample(s, plan.background_seed), train) {
                Ok(bg) => bg,
                Err(e) => {
                    rec.skipped = Some(e.to_string());
                    records.push(rec);
                    continue;
                }
            };
            match time_runs(plan.repeats, || explain(sf, Method::KernelShap, instance, &background, train, settings)) {
                Ok((secs, attr)) => {
                    rec.wall_seconds = Some(secs);
                    rec.base_value_gap = model_mean.map(|m| (attr.base_value - m).abs());
                }
                Err(e) => rec.skipped = Some(e.to_string()),
            }
            records.push(rec);
        }
        if plan.lime_enabled {
            let mut rec = record(Method::Lime, None);
            if sf.semantics != ScoreSemantics::FraudProbability {
                rec.skipped = Some("LIME is only run on fraud-probability models".into());
            } else {
                let empty = ResolvedBackground::from_rows(fraudex_core::Matrix::zeros(0, sf.n_features()));
                match time_runs(plan.repeats, || explain(sf, Method::Lime, instance, &empty, train, settings)) {
                    Ok((secs, _)) => rec.wall_seconds = Some(secs),
                    Err(e) => rec.skipped = Some(e.to_string()),
                }
            }
            records.push(rec);
        }
    }
    records
}

fn time_runs<T, E>(repeats: usize, mut f: impl FnMut() -> Result<T, E>) -> Result<(f64, T), E> {
    let mut last = f()?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        last = f()?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((median(&times), last))
}

/// Seed-selected fraud row of `data`: returns its position and row id.
pub fn select_fraud_instance(data: &Dataset, seed: u64) -> Result<(usize, u64), BenchError> {
    let fraud = data.positions_with_label(1)?;
    if fraud.is_empty() {
        return Err(fraudex_core::Error::Empty("no fraud rows to explain").into());
    }
    let pos = fraud[(rng::splitmix64(seed ^ 0x1457) % fraud.len() as u64) as usize];
    Ok((pos, data.row_ids[pos]))
}

#[cfg(test)]
mod tests {
    use super::*;

    use fraudex_core::explain::RankedEntry;

    fn ranked(features: &[usize], k: usize) -> RankedFeatures {
        let entries = features
            .iter()
            .enumerate()
            .map(|(pos, &j)| RankedEntry { feature_index: j, feature_name: format!("f{j}"), phi: 1.0, rank: pos + 1 })
            .collect();
        RankedFeatures { entries, k }
    }

    #[test]
    fn overlap_and_footrule() {
        let all: Vec<usize> = (0..10).collect();
        assert_eq!(agreement(&ranked(&all, 10), &ranked(&all, 10)).unwrap(), Overlap { overlap: 10, footrule: 0 });
        assert_eq!(agreement(&ranked(&[0, 1], 2), &ranked(&[5, 6], 2)).unwrap().overlap, 0);
        // f1 at 1 vs 3, f2 at 2 vs 2.
        assert_eq!(agreement(&ranked(&[1, 2], 2), &ranked(&[7, 2, 1], 2)).unwrap(), Overlap { overlap: 2, footrule: 2 });
        assert!(matches!(agreement(&ranked(&[1], 2), &ranked(&[1], 3)), Err(BenchError::MismatchedK(2, 3))));
    }
}
