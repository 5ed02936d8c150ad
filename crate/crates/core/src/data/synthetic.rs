use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{encode, fit_schema, Cell, ColumnDecl, Dataset, RawRecord};
use crate::math::{mean_std, sigmoid};
use crate::{Error, Result};

/// Parameters of the synthetic transaction generator.
///
/// Numeric columns are Gaussian with random location and scale; categorical
/// columns draw from `categories` values with Zipf-like frequencies and a
/// small missing rate. Labels follow a sparse logistic model over
/// `n_informative` randomly chosen encoded features, so the true feature
/// importance is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    pub n_numeric: usize,
    pub n_categorical: usize,
    pub n_informative: usize,
    pub fraud_rate: f64,
    pub seed: u64,
    pub categories: usize,
    pub missing_rate: f64,
}

impl SyntheticSpec {
    pub fn new(n_rows: usize, n_numeric: usize, n_categorical: usize, fraud_rate: f64, seed: u64) -> Self {
        Self {
            n_rows,
            n_numeric,
            n_categorical,
            n_informative: 5.min(n_numeric + n_categorical),
            fraud_rate,
            seed,
            categories: 6,
            missing_rate: 0.02,
        }
    }

    pub fn with_informative(mut self, k: usize) -> Self {
        self.n_informative = k;
        self
    }
}

/// One nonzero term of the generating logit, in encoded-feature units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeTerm {
    pub feature: usize,
    pub name: String,
    pub weight: f64,
}

/// `logit(P(fraud | x)) = intercept + Σ weight · x[feature]` over the
/// encoded matrix. Standardized weight magnitudes lie in `[1, 2]`, well above
/// the 0.1 floor below which sign recovery is not expected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeWeights {
    pub intercept: f64,
    pub terms: Vec<GenerativeTerm>,
}

impl GenerativeWeights {
    pub fn dense(&self, n_features: usize) -> Vec<f64> {
        let mut w = alloc::vec![0.0; n_features];
        for t in &self.terms {
            w[t.feature] = t.weight;
        }
        w
    }
}

pub const DETECTABILITY_FLOOR: f64 = 0.1;

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, GenerativeWeights)> {
    if !(spec.fraud_rate > 0.0 && spec.fraud_rate < 0.5) {
        return Err(Error::InvalidParameter(format!("fraud_rate {} not in (0, 0.5)", spec.fraud_rate)));
    }
    let n_features = spec.n_numeric + spec.n_categorical;
    if spec.n_informative > n_features {
        return Err(Error::InvalidParameter(format!(
            "{} informative features requested but only {n_features} exist",
            spec.n_informative
        )));
    }
    if spec.n_categorical > 0 && spec.categories == 0 {
        return Err(Error::InvalidParameter("categorical columns need at least one category".into()));
    }
    let mut rng = crate::rng::seeded(spec.seed);

    let mut decls = Vec::with_capacity(n_features);
    let mut locations = Vec::with_capacity(spec.n_numeric);
    for j in 0..spec.n_numeric {
        decls.push(ColumnDecl::numeric(format!("num_{j:02}")));
        let loc: f64 = rng.random_range(0.0..100.0);
        let scale: f64 = rng.random_range(1.0..20.0);
        locations.push((loc, scale));
    }
    for j in 0..spec.n_categorical {
        decls.push(ColumnDecl::categorical(format!("cat_{j:02}")));
    }
    // Zipf-like category law shared by all categorical columns.
    let zipf: Vec<f64> = (0..spec.categories).map(|k| 1.0 / (k + 1) as f64).collect();
    let zipf_total: f64 = zipf.iter().sum();

    let mut records = Vec::with_capacity(spec.n_rows);
    for _ in 0..spec.n_rows {
        let mut values = Vec::with_capacity(n_features);
        for (j, &(loc, scale)) in locations.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push((decls[j].name.clone(), Cell::Number(loc + scale * z)));
        }
        for j in 0..spec.n_categorical {
            let name = decls[spec.n_numeric + j].name.clone();
            let cell = if rng.random::<f64>() < spec.missing_rate {
                Cell::Missing
            } else {
                let mut u = rng.random::<f64>() * zipf_total;
                let mut k = 0;
                while k + 1 < zipf.len() && u >= zipf[k] {
                    u -= zipf[k];
                    k += 1;
                }
                Cell::Text(format!("{name}_v{k}"))
            };
            values.push((name, cell));
        }
        records.push(RawRecord { values, label: None });
    }
    let schema = fit_schema(&records, &decls)?;
    let mut dataset = encode(&records, &schema);

    let mut informative: Vec<usize> =
        rand::seq::index::sample(&mut rng, n_features, spec.n_informative).into_iter().collect();
    informative.sort_unstable();
    let mut terms = Vec::with_capacity(informative.len());
    let mut offset = 0.0;
    for &j in &informative {
        let magnitude: f64 = rng.random_range(1.0..2.0);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (m, s) = mean_std(&dataset.matrix.column(j));
        let s = if s > 0.0 { s } else { 1.0 };
        let weight = sign * magnitude / s;
        offset -= weight * m;
        terms.push(GenerativeTerm { feature: j, name: decls[j].name.clone(), weight });
    }
    let partial: Vec<f64> = dataset
        .matrix
        .iter_rows()
        .map(|x| offset + terms.iter().map(|t| t.weight * x[t.feature]).sum::<f64>())
        .collect();

    // Bisection on the intercept so the expected fraud rate hits the target.
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let rate = partial.iter().map(|z| sigmoid(z + mid)).sum::<f64>() / partial.len().max(1) as f64;
        if rate < spec.fraud_rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let shift = 0.5 * (lo + hi);
    let labels: Vec<u8> = partial.iter().map(|z| u8::from(rng.random::<f64>() < sigmoid(z + shift))).collect();
    let n_fraud = labels.iter().filter(|&&y| y == 1).count();
    if n_fraud < 5 {
        return Err(Error::TooFewFraudRows { found: n_fraud, required: 5 });
    }
    dataset.labels = Some(labels);
    Ok((dataset, GenerativeWeights { intercept: offset + shift, terms }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraud_rate_matches_target() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(10_000, 6, 4, 0.035, 1)).unwrap();
        let rate = ds.fraud_rate().unwrap();
        assert!((rate - 0.035).abs() <= 0.01, "{rate}");
    }

    #[test]
    fn weights_list_exactly_the_informative_features() {
        let spec = SyntheticSpec::new(2_000, 8, 4, 0.1, 5).with_informative(3);
        let (ds, w) = generate_synthetic(&spec).unwrap();
        assert_eq!(w.terms.len(), 3);
        assert_eq!(w.dense(ds.n_features()).iter().filter(|v| **v != 0.0).count(), 3);
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = SyntheticSpec::new(500, 3, 2, 0.1, 9);
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            generate_synthetic(&SyntheticSpec::new(100, 2, 0, 0.6, 0)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            generate_synthetic(&SyntheticSpec::new(40, 2, 0, 0.01, 0)),
            Err(Error::TooFewFraudRows { .. })
        ));
    }

    #[test]
    fn encoded_categoricals_are_valid_codes() {
        let (ds, _) = generate_synthetic(&SyntheticSpec::new(1_000, 1, 3, 0.1, 2)).unwrap();
        for j in 1..4 {
            let card = ds.schema.category_map(j).unwrap().cardinality() as f64;
            for v in ds.matrix.column(j) {
                assert!(v >= 0.0 && v < card && v.fract() == 0.0);
            }
        }
    }
}
