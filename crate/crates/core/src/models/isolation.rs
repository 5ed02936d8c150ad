use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::IsolationParams;
use crate::math::{ln, pow2, EULER_GAMMA};
use crate::rng::Rng;
use crate::Matrix;

/// Average path length of an unsuccessful BST search over `n` points, used
/// both to normalize depths and to credit unexpanded leaves.
pub fn average_path_length(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let n = n as f64;
            2.0 * (ln(n - 1.0) + EULER_GAMMA) - 2.0 * (n - 1.0) / n
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum INode {
    Leaf { size: u32 },
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    nodes: Vec<INode>,
}

impl IsolationTree {
    fn grow(x: &Matrix, sample: Vec<usize>, height_limit: usize, rng: &mut Rng) -> Self {
        let mut nodes = alloc::vec![INode::Leaf { size: 0 }];
        let mut stack = alloc::vec![(0usize, sample, 0usize)];
        let mut spans: Vec<(usize, f64, f64)> = Vec::new();
        while let Some((id, rows, depth)) = stack.pop() {
            nodes[id] = INode::Leaf { size: rows.len() as u32 };
            if depth >= height_limit || rows.len() <= 1 {
                continue;
            }
            spans.clear();
            for f in 0..x.cols() {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &i in &rows {
                    let v = x.get(i, f);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if lo < hi {
                    spans.push((f, lo, hi));
                }
            }
            if spans.is_empty() {
                continue;
            }
            let (feature, lo, hi) = spans[rng.random_range(0..spans.len())];
            let threshold = rng.random_range(lo..hi);
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x.get(i, feature) <= threshold);
            let left = nodes.len();
            nodes.push(INode::Leaf { size: 0 });
            nodes.push(INode::Leaf { size: 0 });
            nodes[id] = INode::Split { feature: feature as u32, threshold, left: left as u32, right: left as u32 + 1 };
            stack.push((left + 1, right_rows, depth + 1));
            stack.push((left, left_rows, depth + 1));
        }
        Self { nodes }
    }

    pub fn path_length(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        let mut depth = 0.0;
        loop {
            match self.nodes[i] {
                INode::Leaf { size } => return depth + average_path_length(size as usize),
                INode::Split { feature, threshold, left, right } => {
                    i = if x[feature as usize] <= threshold { left as usize } else { right as usize };
                    depth += 1.0;
                }
            }
        }
    }
}

/// Isolation forest: random axis-aligned partitions of small subsamples.
/// Anomaly score `2^(-E[h(x)] / c(psi))`, in `(0, 1]`, larger = more
/// anomalous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationForest {
    pub trees: Vec<IsolationTree>,
    pub sample_size: usize,
}

impl IsolationForest {
    pub(crate) fn fit(x: &Matrix, params: &IsolationParams, seed: u64) -> Self {
        let psi = params.max_samples.min(x.rows()).max(1);
        let height_limit = libm::ceil(libm::log2(psi.max(2) as f64)) as usize;
        let trees = (0..params.n_estimators)
            .map(|t| {
                let mut rng = crate::rng::derive(seed, t as u64);
                let sample: Vec<usize> = rand::seq::index::sample(&mut rng, x.rows(), psi).into_iter().collect();
                IsolationTree::grow(x, sample, height_limit, &mut rng)
            })
            .collect();
        Self { trees, sample_size: psi }
    }

    pub fn mean_path_length(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn anomaly_score(&self, x: &[f64]) -> f64 {
        let c = average_path_length(self.sample_size);
        if c == 0.0 {
            return 0.5;
        }
        pow2(-self.mean_path_length(x) / c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizer_matches_closed_form() {
        assert_eq!(average_path_length(1), 0.0);
        assert_eq!(average_path_length(2), 1.0);
        // 2 * (ln 255 + gamma) - 2 * 255 / 256
        let expected = 2.0 * (libm::log(255.0) + EULER_GAMMA) - 2.0 * 255.0 / 256.0;
        assert!((average_path_length(256) - expected).abs() < 1e-12);
    }
}
