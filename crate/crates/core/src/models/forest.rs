use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, GrowParams, Tree};
use super::{ForestParams, TreeParams};
use crate::Matrix;

/// Single CART classifier; leaves hold the weighted fraud fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub tree: Tree,
}

impl DecisionTree {
    pub(crate) fn fit(x: &Matrix, labels: &[u8], weights: &[f64], params: &TreeParams, seed: u64) -> Self {
        let samples: Vec<usize> = (0..x.rows()).collect();
        let b: Vec<f64> = weights.iter().zip(labels).map(|(w, &y)| w * y as f64).collect();
        let grow_params =
            GrowParams { max_depth: Some(params.max_depth), min_samples_leaf: params.min_samples_leaf, max_features: None };
        let tree = grow(x, &samples, weights, &b, Criterion::Gini, &grow_params, &mut crate::rng::seeded(seed));
        Self { tree }
    }

    pub fn fraud_probability(&self, x: &[f64]) -> f64 {
        self.tree.predict(x)
    }
}

/// Bagged CART ensemble with per-split feature subsampling. The score is the
/// mean of the trees' leaf probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub(crate) fn fit(x: &Matrix, labels: &[u8], weights: &[f64], params: &ForestParams, seed: u64) -> Self {
        let n = x.rows();
        let d = x.cols();
        let max_features = params.max_features.unwrap_or_else(|| (libm::floor(libm::sqrt(d as f64)) as usize).max(1));
        let grow_params = GrowParams {
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            max_features: Some(max_features),
        };
        // Each tree draws from its own stream so the ensemble is independent
        // of construction order.
        let trees = (0..params.n_estimators)
            .map(|t| {
                let mut rng = crate::rng::derive(seed, t as u64);
                let mut counts = alloc::vec![0u32; n];
                for _ in 0..n {
                    counts[rng.random_range(0..n)] += 1;
                }
                let samples: Vec<usize> = (0..n).filter(|&i| counts[i] > 0).collect();
                let a: Vec<f64> = (0..n).map(|i| counts[i] as f64 * weights[i]).collect();
                let b: Vec<f64> = (0..n).map(|i| a[i] * labels[i] as f64).collect();
                grow(x, &samples, &a, &b, Criterion::Gini, &grow_params, &mut rng)
            })
            .collect();
        Self { trees }
    }

    pub fn fraud_probability(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}
