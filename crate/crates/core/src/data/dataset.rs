use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Schema;
use crate::{Error, Matrix, Result};

/// Encoded feature matrix with optional binary labels (1 = fraud).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub matrix: Matrix,
    pub labels: Option<Vec<u8>>,
    pub schema: Schema,
    pub row_ids: Vec<u64>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_features(&self) -> usize {
        self.matrix.cols()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.names()
    }

    pub fn labels(&self) -> Result<&[u8]> {
        self.labels.as_deref().ok_or(Error::MissingLabels)
    }

    pub fn fraud_rate(&self) -> Option<f64> {
        let l = self.labels.as_ref()?;
        if l.is_empty() {
            return None;
        }
        Some(l.iter().map(|&y| y as f64).sum::<f64>() / l.len() as f64)
    }

    /// Position of the row with the given id.
    pub fn position_of(&self, row_id: u64) -> Option<usize> {
        self.row_ids.iter().position(|&r| r == row_id)
    }

    /// Rows at the given positions (in that order).
    pub fn subset(&self, positions: &[usize]) -> Dataset {
        Dataset {
            matrix: self.matrix.select_rows(positions),
            labels: self.labels.as_ref().map(|l| positions.iter().map(|&i| l[i]).collect()),
            schema: self.schema.clone(),
            row_ids: positions.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    /// Keeps only the listed feature columns.
    pub fn select_features(&self, columns: &[usize]) -> Dataset {
        Dataset {
            matrix: self.matrix.select_cols(columns),
            labels: self.labels.clone(),
            schema: self.schema.select(columns),
            row_ids: self.row_ids.clone(),
        }
    }

    /// Positions of rows whose label equals `label`.
    pub fn positions_with_label(&self, label: u8) -> Result<Vec<usize>> {
        Ok(self.labels()?.iter().enumerate().filter(|(_, &y)| y == label).map(|(i, _)| i).collect())
    }
}

/// Stratified, seeded holdout split. Each class contributes
/// `round(count * holdout_fraction)` rows (at least one, at most count - 1)
/// to validation; both parts keep the original row order.
pub fn split(dataset: &Dataset, holdout_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("holdout_fraction {holdout_fraction} not in (0, 1)")));
    }
    let labels = dataset.labels()?;
    let mut rng = crate::rng::seeded(seed);
    let mut in_validation = alloc::vec![false; labels.len()];
    for class in [0u8, 1u8] {
        let mut members = dataset.positions_with_label(class)?;
        if members.len() < 2 {
            return Err(Error::ClassTooSmall { label: class, count: members.len() });
        }
        members.shuffle(&mut rng);
        let take = libm::round(members.len() as f64 * holdout_fraction) as usize;
        let take = take.clamp(1, members.len() - 1);
        for &i in &members[..take] {
            in_validation[i] = true;
        }
    }
    let (val, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| in_validation[i]);
    Ok((dataset.subset(&train), dataset.subset(&val)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnEncoding, ColumnSpec, NumericStats};
    use alloc::string::ToString;

    fn toy(n: usize, n_fraud: usize) -> Dataset {
        let schema = Schema {
            columns: alloc::vec![ColumnSpec {
                name: "x".to_string(),
                encoding: ColumnEncoding::Numeric(NumericStats { mean: 0.0, std: 1.0 }),
            }],
        };
        Dataset {
            matrix: Matrix::from_vec(n, 1, (0..n).map(|i| i as f64).collect()),
            labels: Some((0..n).map(|i| u8::from(i < n_fraud)).collect()),
            schema,
            row_ids: (0..n as u64).collect(),
        }
    }

    #[test]
    fn split_sizes_and_partition() {
        let ds = toy(1000, 35);
        let (train, val) = split(&ds, 0.2, 11).unwrap();
        assert_eq!(train.n_rows(), 800);
        assert_eq!(val.n_rows(), 200);
        let mut all: Vec<u64> = train.row_ids.iter().chain(&val.row_ids).copied().collect();
        all.sort_unstable();
        assert_eq!(all, ds.row_ids);
        let rate = val.fraud_rate().unwrap();
        assert!((rate - 0.035).abs() <= 0.005, "{rate}");
    }

    #[test]
    fn split_is_deterministic() {
        let ds = toy(500, 40);
        let a = split(&ds, 0.2, 3).unwrap();
        let b = split(&ds, 0.2, 3).unwrap();
        assert_eq!(a.1.row_ids, b.1.row_ids);
        let c = split(&ds, 0.2, 4).unwrap();
        assert_ne!(a.1.row_ids, c.1.row_ids);
    }

    #[test]
    fn split_rejects_tiny_class() {
        let ds = toy(100, 1);
        assert_eq!(split(&ds, 0.2, 0).unwrap_err(), Error::ClassTooSmall { label: 1, count: 1 });
        let mut unlabeled = toy(10, 2);
        unlabeled.labels = None;
        assert_eq!(split(&unlabeled, 0.2, 0).unwrap_err(), Error::MissingLabels);
    }
}
