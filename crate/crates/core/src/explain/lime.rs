//! LIME for tabular data: perturb around the instance, weight samples by
//! proximity and fit a sparse weighted ridge surrogate.
//!
//! Numeric features are perturbed as `N(x_j, std_j)` using training
//! statistics and represented standardized; categorical features are drawn
//! from the training code distribution and represented by the indicator
//! "same category as the instance".

use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Normal, weighted::WeightedIndex};
use serde::{Deserialize, Serialize};

use super::{Attribution, Diagnostics, Method};
use crate::data::{ColumnKind, Dataset};
use crate::linalg::solve_spd;
use crate::math::{exp, mean_std, sqrt};
use crate::models::{ScoreSemantics, Scorer};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimeConfig {
    pub n_perturbations: usize,
    /// Defaults to `0.75 * sqrt(M)`.
    pub kernel_width: Option<f64>,
    pub top_k: usize,
    pub ridge: f64,
    pub seed: u64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self { n_perturbations: 5000, kernel_width: None, top_k: 10, ridge: 1e-3, seed: 0 }
    }
}

enum Sampler {
    Numeric { mean: f64, std: f64 },
    Categorical { codes: Vec<f64>, dist: Option<WeightedIndex<f64>> },
}

impl Sampler {
    fn fit(column: &[f64], kind: ColumnKind) -> Self {
        match kind {
            ColumnKind::Numeric => {
                let (mean, std) = mean_std(column);
                Sampler::Numeric { mean, std: if std > 0.0 { std } else { 1.0 } }
            }
            ColumnKind::Categorical => {
                let mut counts: Vec<(f64, f64)> = Vec::new();
                let mut sorted = column.to_vec();
                sorted.sort_by(f64::total_cmp);
                for v in sorted {
                    match counts.last_mut() {
                        Some((c, n)) if *c == v => *n += 1.0,
                        _ => counts.push((v, 1.0)),
                    }
                }
                let dist = WeightedIndex::new(counts.iter().map(|c| c.1)).ok();
                Sampler::Categorical { codes: counts.into_iter().map(|c| c.0).collect(), dist }
            }
        }
    }

    fn draw(&self, x: f64, rng: &mut crate::rng::Rng) -> f64 {
        match self {
            Sampler::Numeric { std, .. } => Normal::new(x, *std).map_or(x, |n| n.sample(rng)),
            Sampler::Categorical { codes, dist } => dist.as_ref().map_or(x, |d| codes[d.sample(rng)]),
        }
    }

    fn represent(&self, v: f64, x: f64) -> f64 {
        match self {
            Sampler::Numeric { mean, std } => (v - mean) / std,
            Sampler::Categorical { .. } => (v == x) as u8 as f64,
        }
    }
}

pub fn lime<S: Scorer + ?Sized>(model: &S, instance: &[f64], train: &Dataset, config: &LimeConfig) -> Result<Attribution> {
    if let Some(s @ (ScoreSemantics::ReconstructionError | ScoreSemantics::AnomalyScore)) = model.semantics() {
        return Err(Error::UnsupportedModel(alloc::format!(
            "LIME needs a fraud probability; this model returns {s:?}"
        )));
    }
    let m = model.n_features();
    if instance.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: instance.len() });
    }
    if train.n_features() != m {
        return Err(Error::DimensionMismatch { expected: m, found: train.n_features() });
    }
    if train.n_rows() == 0 {
        return Err(Error::Empty("LIME training data"));
    }
    let n = config.n_perturbations;
    if n < 2 {
        return Err(Error::InvalidParameter(alloc::format!("LIME needs at least 2 perturbations, got {n}")));
    }
    if config.top_k == 0 || !(config.ridge >= 0.0) {
        return Err(Error::InvalidParameter("LIME top_k must be positive and ridge non-negative".into()));
    }
    let width = config.kernel_width.unwrap_or(0.75 * sqrt(m as f64));
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("kernel width must be positive, got {width}")));
    }

    let kinds = train.schema.kinds();
    let samplers: Vec<Sampler> = (0..m)
        .map(|j| Sampler::fit(&train.matrix.column(j), kinds.get(j).copied().unwrap_or(ColumnKind::Numeric)))
        .collect();
    let origin: Vec<f64> = (0..m).map(|j| samplers[j].represent(instance[j], instance[j])).collect();

    // Row 0 is the instance itself.
    let mut rng = crate::rng::seeded(config.seed);
    let mut z = vec![0.0; n * m];
    let mut y = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut point = instance.to_vec();
    for i in 0..n {
        if i > 0 {
            for j in 0..m {
                point[j] = samplers[j].draw(instance[j], &mut rng);
            }
        }
        let row = &mut z[i * m..(i + 1) * m];
        let mut d2 = 0.0;
        for j in 0..m {
            row[j] = samplers[j].represent(point[j], instance[j]);
            d2 += (row[j] - origin[j]) * (row[j] - origin[j]);
        }
        w[i] = exp(-d2 / (width * width));
        y[i] = model.score(&point);
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::DegenerateSurrogate(n));
    }

    let wsum: f64 = w.iter().sum();
    let wmean = |col: &dyn Fn(usize) -> f64| (0..n).map(|i| w[i] * col(i)).sum::<f64>() / wsum;
    let y_bar = wmean(&|i| y[i]);
    let z_bar: Vec<f64> = (0..m).map(|j| wmean(&|i| z[i * m + j])).collect();

    // Feature selection by |weighted correlation| with the model output.
    let var_y = wmean(&|i| (y[i] - y_bar) * (y[i] - y_bar));
    let mut corr: Vec<(usize, f64)> = (0..m)
        .map(|j| {
            let cov = wmean(&|i| (z[i * m + j] - z_bar[j]) * (y[i] - y_bar));
            let var = wmean(&|i| (z[i * m + j] - z_bar[j]) * (z[i * m + j] - z_bar[j]));
            let r = if var > 0.0 && var_y > 0.0 { cov / sqrt(var * var_y) } else { 0.0 };
            (j, r.abs())
        })
        .collect();
    corr.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut selected: Vec<usize> = corr.iter().take(config.top_k.min(m)).map(|c| c.0).collect();
    selected.sort_unstable();

    // Weighted ridge on centred data; the intercept is not penalized.
    let k = selected.len();
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for i in 0..n {
        for (p, &jp) in selected.iter().enumerate() {
            let zp = w[i] * (z[i * m + jp] - z_bar[jp]);
            b[p] += zp * (y[i] - y_bar);
            for (q, &jq) in selected.iter().enumerate() {
                a[p * k + q] += zp * (z[i * m + jq] - z_bar[jq]);
            }
        }
    }
    for p in 0..k {
        a[p * k + p] += config.ridge;
    }
    let beta = solve_spd(&a, &b)?;
    let intercept = y_bar - selected.iter().zip(&beta).map(|(&j, c)| c * z_bar[j]).sum::<f64>();

    let surrogate = |row: &[f64]| intercept + selected.iter().zip(&beta).map(|(&j, c)| c * row[j]).sum::<f64>();
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for i in 0..n {
        let r = y[i] - surrogate(&z[i * m..(i + 1) * m]);
        ss_res += w[i] * r * r;
        ss_tot += w[i] * (y[i] - y_bar) * (y[i] - y_bar);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };

    let mut phi = vec![0.0; m];
    for (&j, c) in selected.iter().zip(&beta) {
        phi[j] = *c;
    }
    let predicted = y[0];
    Ok(Attribution {
        method: Method::Lime,
        feature_names: train.feature_names(),
        phi,
        base_value: intercept,
        predicted_value: predicted,
        diagnostics: Diagnostics {
            perturbations: Some(n),
            kernel_width: Some(width),
            surrogate_r2: Some(r2),
            discrepancy: Some((surrogate(&origin) - predicted).abs()),
            selected_features: Some(selected),
            ..Default::default()
        },
    })
}
