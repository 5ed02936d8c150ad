use alloc::vec::Vec;

use super::RankedFeatures;
use crate::data::Dataset;
use crate::math::mean_std;
use crate::models::{ModelKind, ScoreFunction};
use crate::{Error, Result};

/// Global importance from a logistic regression: `coef_i * std_i` over
/// `data`, ranked by magnitude. Features are z-scored already, so this
/// mostly rescales categorical codes.
pub fn global_lr_importance(lr: &ScoreFunction, data: &Dataset, k: usize) -> Result<RankedFeatures> {
    let Some((coef, _)) = lr.logistic_coefficients() else {
        return Err(Error::UnsupportedModel(alloc::format!(
            "global importance needs a {} model, got {}",
            ModelKind::LogisticRegression,
            lr.kind
        )));
    };
    if data.n_features() != coef.len() {
        return Err(Error::DimensionMismatch { expected: coef.len(), found: data.n_features() });
    }
    let standardized: Vec<f64> = coef
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let (_, s) = mean_std(&data.matrix.column(j));
            c * s
        })
        .collect();
    Ok(RankedFeatures::from_scores(&lr.feature_names, &standardized, k))
}
