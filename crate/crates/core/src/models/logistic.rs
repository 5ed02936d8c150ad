use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LogisticParams;
use crate::math::{mean_std, sigmoid, softplus, sqrt};
use crate::{Error, Matrix, Result};

/// L2-penalized logistic regression fitted by full-batch gradient descent
/// with Armijo backtracking.
///
/// Descent runs on standardized columns (a diagonal preconditioner) and the
/// coefficients are mapped back to the encoded feature scale, so
/// `coef · x + intercept` is the logit on encoded inputs. The penalty applies
/// to the standardized coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticRegression {
    pub(crate) fn fit(x: &Matrix, labels: &[u8], weights: &[f64], params: &LogisticParams) -> Result<Self> {
        let n = x.rows();
        let d = x.cols();
        let stats: Vec<(f64, f64)> = (0..d)
            .map(|j| {
                let (m, s) = mean_std(&x.column(j));
                (m, if s > 0.0 { s } else { 1.0 })
            })
            .collect();
        let mut z = Matrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                z.set(i, j, (x.get(i, j) - stats[j].0) / stats[j].1);
            }
        }
        let y: Vec<f64> = labels.iter().map(|&v| v as f64).collect();
        let w_total: f64 = weights.iter().sum();

        // theta = [standardized coefficients..., intercept]
        let objective = |theta: &[f64]| -> f64 {
            let (beta, b0) = theta.split_at(d);
            let mut loss = 0.0;
            for i in 0..n {
                let t = b0[0] + z.row(i).iter().zip(beta).map(|(a, c)| a * c).sum::<f64>();
                loss += weights[i] * (softplus(t) - y[i] * t);
            }
            loss / w_total + 0.5 * params.l2 * beta.iter().map(|c| c * c).sum::<f64>()
        };
        let gradient = |theta: &[f64], g: &mut [f64]| {
            let (beta, b0) = theta.split_at(d);
            g.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                let row = z.row(i);
                let t = b0[0] + row.iter().zip(beta).map(|(a, c)| a * c).sum::<f64>();
                let r = weights[i] * (sigmoid(t) - y[i]) / w_total;
                for (gj, a) in g[..d].iter_mut().zip(row) {
                    *gj += r * a;
                }
                g[d] += r;
            }
            for (gj, c) in g[..d].iter_mut().zip(beta) {
                *gj += params.l2 * c;
            }
        };

        let mut theta = alloc::vec![0.0; d + 1];
        let mut g = alloc::vec![0.0; d + 1];
        let mut candidate = alloc::vec![0.0; d + 1];
        let mut f = objective(&theta);
        let mut step: f64 = 1.0;
        let mut iterations = 0;
        let mut converged = false;
        for it in 0..params.max_iter {
            gradient(&theta, &mut g);
            let gnorm2: f64 = g.iter().map(|v| v * v).sum();
            if sqrt(gnorm2) < params.tol {
                converged = true;
                break;
            }
            iterations = it + 1;
            step = (step * 2.0).min(1e4);
            loop {
                for k in 0..=d {
                    candidate[k] = theta[k] - step * g[k];
                }
                let fc = objective(&candidate);
                if !fc.is_finite() && step < 1e-300 {
                    return Err(Error::Divergence { model: "logistic regression", iteration: it });
                }
                if fc <= f - 0.5 * step * gnorm2 {
                    f = fc;
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    // No further decrease is representable.
                    converged = true;
                    break;
                }
            }
            if !f.is_finite() {
                return Err(Error::Divergence { model: "logistic regression", iteration: it });
            }
            if converged {
                break;
            }
            theta.copy_from_slice(&candidate);
        }
        let coef: Vec<f64> = (0..d).map(|j| theta[j] / stats[j].1).collect();
        let intercept = theta[d] - (0..d).map(|j| theta[j] * stats[j].0 / stats[j].1).sum::<f64>();
        Ok(Self { coef, intercept, iterations, converged })
    }

    #[inline]
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    #[inline]
    pub fn fraud_probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}
