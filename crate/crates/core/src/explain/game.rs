use alloc::vec::Vec;

use crate::models::Scorer;
use crate::Matrix;

/// The cooperative game behind SHAP: `v(S)` is the mean score over hybrid
/// rows (features in `S` from the instance, the rest from each background
/// row). Coalitions are bitmasks, so at most 63 features are supported.
pub struct CoalitionGame<'a, S: Scorer + ?Sized> {
    model: &'a S,
    instance: &'a [f64],
    background: &'a Matrix,
}

impl<'a, S: Scorer + ?Sized> CoalitionGame<'a, S> {
    pub fn new(model: &'a S, instance: &'a [f64], background: &'a Matrix) -> Self {
        Self { model, instance, background }
    }

    pub fn n_players(&self) -> usize {
        self.instance.len()
    }

    /// Score of the instance itself (the grand coalition).
    pub fn full_value(&self) -> f64 {
        self.model.score(self.instance)
    }

    /// Mean background score (the empty coalition).
    pub fn empty_value(&self) -> f64 {
        let n = self.background.rows();
        self.background.iter_rows().map(|r| self.model.score(r)).sum::<f64>() / n as f64
    }

    pub fn value(&self, mask: u64, buf: &mut Vec<f64>) -> f64 {
        let present: Vec<usize> = (0..self.n_players()).filter(|&j| mask >> j & 1 == 1).collect();
        let mut sum = 0.0;
        for row in self.background.iter_rows() {
            buf.clear();
            buf.extend_from_slice(row);
            for &j in &present {
                buf[j] = self.instance[j];
            }
            sum += self.model.score(buf);
        }
        sum / self.background.rows() as f64
    }
}
