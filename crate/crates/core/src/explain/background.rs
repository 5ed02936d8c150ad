use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundStrategy {
    All,
    NormalOnly,
    FraudOnly,
    Custom(Matrix),
}

impl BackgroundStrategy {
    fn name(&self) -> &'static str {
        match self {
            BackgroundStrategy::All => "all",
            BackgroundStrategy::NormalOnly => "normal_only",
            BackgroundStrategy::FraudOnly => "fraud_only",
            BackgroundStrategy::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsample {
    pub size: usize,
    pub seed: u64,
}

/// Which reference rows SHAP compares against. Label filters are applied
/// before the optional subsample (drawn without replacement).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSpec {
    pub strategy: BackgroundStrategy,
    pub subsample: Option<Subsample>,
}

impl BackgroundSpec {
    pub fn all() -> Self {
        Self { strategy: BackgroundStrategy::All, subsample: None }
    }

    pub fn subsample(size: usize, seed: u64) -> Self {
        Self::all().sampled(size, seed)
    }

    pub fn normal_only() -> Self {
        Self { strategy: BackgroundStrategy::NormalOnly, subsample: None }
    }

    pub fn fraud_only() -> Self {
        Self { strategy: BackgroundStrategy::FraudOnly, subsample: None }
    }

    pub fn custom(rows: Matrix) -> Self {
        Self { strategy: BackgroundStrategy::Custom(rows), subsample: None }
    }

    pub fn sampled(mut self, size: usize, seed: u64) -> Self {
        self.subsample = Some(Subsample { size, seed });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedBackground {
    pub spec: BackgroundSpec,
    pub rows: Matrix,
    /// Dataset positions of the chosen rows (custom rows: their own index).
    pub source_rows: Vec<usize>,
    pub feature_names: Vec<String>,
}

impl ResolvedBackground {
    /// Background made directly from rows, for tests and ad-hoc use.
    pub fn from_rows(rows: Matrix) -> Self {
        let names = (0..rows.cols()).map(|j| alloc::format!("f{j}")).collect();
        Self {
            source_rows: (0..rows.rows()).collect(),
            spec: BackgroundSpec::custom(rows.clone()),
            rows,
            feature_names: names,
        }
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        self.feature_names = names;
        self
    }

    pub fn len(&self) -> usize {
        self.rows.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn resolve_background(spec: &BackgroundSpec, data: &Dataset) -> Result<ResolvedBackground> {
    let candidates: Vec<usize> = match &spec.strategy {
        BackgroundStrategy::All => (0..data.n_rows()).collect(),
        BackgroundStrategy::NormalOnly => data.positions_with_label(0)?,
        BackgroundStrategy::FraudOnly => data.positions_with_label(1)?,
        BackgroundStrategy::Custom(m) => (0..m.rows()).collect(),
    };
    if candidates.is_empty() {
        return Err(Error::EmptyBackground(spec.strategy.name()));
    }
    let chosen = match spec.subsample {
        None => candidates,
        Some(Subsample { size, seed }) => {
            if size > candidates.len() {
                return Err(Error::BackgroundTooLarge { requested: size, available: candidates.len() });
            }
            let mut rng = crate::rng::seeded(seed);
            let mut picked: Vec<usize> =
                rand::seq::index::sample(&mut rng, candidates.len(), size).into_iter().map(|k| candidates[k]).collect();
            picked.sort_unstable();
            picked
        }
    };
    let rows = match &spec.strategy {
        BackgroundStrategy::Custom(m) => m.select_rows(&chosen),
        _ => data.matrix.select_rows(&chosen),
    };
    if rows.is_empty() {
        return Err(Error::EmptyBackground(spec.strategy.name()));
    }
    Ok(ResolvedBackground { spec: spec.clone(), rows, source_rows: chosen, feature_names: data.feature_names() })
}
