use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, GrowParams, Tree};
use super::BoostingParams;
use crate::math::{ln, sigmoid};
use crate::{Error, Matrix, Result};

/// Gradient-boosted trees on the logistic loss. Each round fits a Newton
/// tree to the current gradients/hessians; leaves hold `-G / (H + l2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub base_logit: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl GradientBoosting {
    pub(crate) fn fit(x: &Matrix, labels: &[u8], weights: &[f64], params: &BoostingParams, seed: u64) -> Result<Self> {
        let n = x.rows();
        let w_total: f64 = weights.iter().sum();
        let pos: f64 = weights.iter().zip(labels).map(|(w, &y)| w * y as f64).sum();
        let p0 = (pos / w_total).clamp(1e-6, 1.0 - 1e-6);
        let base_logit = ln(p0 / (1.0 - p0));
        let samples: Vec<usize> = (0..n).collect();
        let grow_params = GrowParams {
            max_depth: Some(params.max_depth),
            min_samples_leaf: params.min_samples_leaf,
            max_features: None,
        };
        let mut raw = alloc::vec![base_logit; n];
        let mut grad = alloc::vec![0.0; n];
        let mut hess = alloc::vec![0.0; n];
        let mut rng = crate::rng::seeded(seed);
        let mut trees = Vec::with_capacity(params.n_estimators);
        for round in 0..params.n_estimators {
            for i in 0..n {
                let p = sigmoid(raw[i]);
                grad[i] = weights[i] * (p - labels[i] as f64);
                hess[i] = weights[i] * p * (1.0 - p);
            }
            let tree = grow(x, &samples, &grad, &hess, Criterion::Newton { l2: params.l2 }, &grow_params, &mut rng);
            for i in 0..n {
                raw[i] += params.learning_rate * tree.predict(x.row(i));
                if !raw[i].is_finite() {
                    return Err(Error::Divergence { model: "gradient boosting", iteration: round });
                }
            }
            trees.push(tree);
        }
        Ok(Self { base_logit, learning_rate: params.learning_rate, trees })
    }

    pub fn logit(&self, x: &[f64]) -> f64 {
        self.base_logit + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn fraud_probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}
