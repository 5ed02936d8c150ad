use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::NaiveBayesParams;
use crate::data::{ColumnKind, Dataset};
use crate::math::{ln, mean_std, sigmoid};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Per-column class-conditional likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Likelihood {
    Gaussian { mean: [f64; 2], var: [f64; 2] },
    /// Laplace-smoothed log probabilities per code; out-of-range codes fall
    /// back to code 0.
    Categorical { log_prob: [Vec<f64>; 2] },
}

impl Likelihood {
    fn log_likelihood(&self, class: usize, v: f64) -> f64 {
        match self {
            Likelihood::Gaussian { mean, var } => {
                let d = v - mean[class];
                -0.5 * (LN_2PI + ln(var[class])) - d * d / (2.0 * var[class])
            }
            Likelihood::Categorical { log_prob } => {
                let table = &log_prob[class];
                let code = if v >= 0.0 && libm::trunc(v) == v && (v as usize) < table.len() { v as usize } else { 0 };
                table[code]
            }
        }
    }
}

/// Gaussian likelihood for numeric columns, smoothed multinomial for
/// categorical codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// `None` when the class never occurs in training data.
    log_prior: [Option<f64>; 2],
    columns: Vec<Likelihood>,
}

impl NaiveBayes {
    pub(crate) fn fit(data: &Dataset, labels: &[u8], params: &NaiveBayesParams) -> Self {
        let x = &data.matrix;
        let n = x.rows();
        let kinds = data.schema.kinds();
        let members: [Vec<usize>; 2] = [
            (0..n).filter(|&i| labels[i] == 0).collect(),
            (0..n).filter(|&i| labels[i] == 1).collect(),
        ];
        let log_prior = [0, 1].map(|c| (!members[c].is_empty()).then(|| ln(members[c].len() as f64 / n as f64)));

        // Variance floor relative to the widest numeric column.
        let max_var = (0..x.cols())
            .filter(|&j| kinds.get(j) != Some(&ColumnKind::Categorical))
            .map(|j| {
                let (_, s) = mean_std(&x.column(j));
                s * s
            })
            .fold(0.0, f64::max);
        let epsilon = if max_var > 0.0 { params.var_smoothing * max_var } else { params.var_smoothing.max(1e-12) };

        let columns = (0..x.cols())
            .map(|j| match data.schema.category_map(j) {
                Some(map) if kinds.len() == x.cols() => {
                    let card = map.cardinality().max(1 + (0..n).map(|i| x.get(i, j) as usize).max().unwrap_or(0));
                    let log_prob = [0, 1].map(|c| {
                        let mut counts = alloc::vec![0.0; card];
                        for &i in &members[c] {
                            let v = x.get(i, j);
                            let code = if v >= 0.0 && (v as usize) < card { v as usize } else { 0 };
                            counts[code] += 1.0;
                        }
                        let total = members[c].len() as f64 + params.alpha * card as f64;
                        counts.iter().map(|k| ln((k + params.alpha) / total)).collect()
                    });
                    Likelihood::Categorical { log_prob }
                }
                _ => {
                    let stats = [0, 1].map(|c| {
                        let vals: Vec<f64> = members[c].iter().map(|&i| x.get(i, j)).collect();
                        let (m, s) = mean_std(&vals);
                        (m, s * s + epsilon)
                    });
                    Likelihood::Gaussian { mean: [stats[0].0, stats[1].0], var: [stats[0].1, stats[1].1] }
                }
            })
            .collect();
        Self { log_prior, columns }
    }

    pub fn fraud_probability(&self, x: &[f64]) -> f64 {
        match self.log_prior {
            [Some(p0), Some(p1)] => {
                let mut joint = [p0, p1];
                for (col, &v) in self.columns.iter().zip(x) {
                    joint[0] += col.log_likelihood(0, v);
                    joint[1] += col.log_likelihood(1, v);
                }
                sigmoid(joint[1] - joint[0])
            }
            [None, Some(_)] => 1.0,
            _ => 0.0,
        }
    }

    /// Class posterior odds contribution of one column; exposed for
    /// diagnostics.
    pub fn column_log_odds(&self, column: usize, v: f64) -> f64 {
        let c = &self.columns[column];
        c.log_likelihood(1, v) - c.log_likelihood(0, v)
    }
}
