//! The eight fraud models, trained from a [`ModelSpec`] and exposed
//! uniformly as a [`ScoreFunction`].

mod boosting;
mod forest;
mod isolation;
mod logistic;
mod naive_bayes;
mod network;
mod tree;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use boosting::GradientBoosting;
pub use forest::{DecisionTree, RandomForest};
pub use isolation::{average_path_length, IsolationForest, IsolationTree};
pub use logistic::LogisticRegression;
pub use naive_bayes::NaiveBayes;
pub use network::{Dense, Loss, Network};
pub use tree::{Node, Tree};

use crate::data::Dataset;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    NaiveBayes,
    LogisticRegression,
    DecisionTree,
    RandomForest,
    GradientBoosting,
    NeuralNetwork,
    Autoencoder,
    IsolationForest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::NaiveBayes,
        ModelKind::LogisticRegression,
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
        ModelKind::NeuralNetwork,
        ModelKind::Autoencoder,
        ModelKind::IsolationForest,
    ];

    /// Stable snake_case identifier used for file names and CLI arguments.
    pub fn slug(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "naive_bayes",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GradientBoosting => "gradient_boosting",
            ModelKind::NeuralNetwork => "neural_network",
            ModelKind::Autoencoder => "autoencoder",
            ModelKind::IsolationForest => "isolation_forest",
        }
    }

    pub fn is_supervised(self) -> bool {
        !matches!(self, ModelKind::Autoencoder | ModelKind::IsolationForest)
    }

    pub fn semantics(self) -> ScoreSemantics {
        match self {
            ModelKind::Autoencoder => ScoreSemantics::ReconstructionError,
            ModelKind::IsolationForest => ScoreSemantics::AnomalyScore,
            _ => ScoreSemantics::FraudProbability,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.slug())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// Accepts the slug or the CamelCase variant name.
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.slug() == s || alloc::format!("{k:?}") == s)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown model kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSemantics {
    /// In `[0, 1]`.
    FraudProbability,
    /// Mean squared reconstruction residual, `>= 0`.
    ReconstructionError,
    /// Isolation-forest score; larger is more anomalous.
    AnomalyScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveBayesParams {
    /// Laplace smoothing for categorical codes.
    pub alpha: f64,
    /// Variance floor as a fraction of the largest numeric column variance.
    pub var_smoothing: f64,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        Self { alpha: 1.0, var_smoothing: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub l2: f64,
    pub max_iter: usize,
    /// Stop when the gradient norm falls below this.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { l2: 1e-4, max_iter: 500, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: 8, min_samples_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features tried per split; `None` = floor(sqrt(d)).
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_estimators: 100, max_depth: None, min_samples_leaf: 1, max_features: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostingParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Leaf-value regularizer in `-G / (H + l2)`.
    pub l2: f64,
    pub min_samples_leaf: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        Self { n_estimators: 100, max_depth: 12, learning_rate: 0.002, l2: 0.0, min_samples_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![50, 50, 50],
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 128,
            epochs: 30,
        }
    }
}

/// Default contamination for the unsupervised detectors: the decision
/// threshold is the `1 - contamination` quantile of training scores.
pub const DEFAULT_CONTAMINATION: f64 = 0.035;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoencoderParams {
    #[serde(flatten)]
    pub network: MlpParams,
    pub contamination: f64,
}

impl Default for AutoencoderParams {
    fn default() -> Self {
        Self { network: MlpParams::default(), contamination: DEFAULT_CONTAMINATION }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsolationParams {
    pub n_estimators: usize,
    pub max_samples: usize,
    pub contamination: f64,
}

impl Default for IsolationParams {
    fn default() -> Self {
        Self { n_estimators: 100, max_samples: 256, contamination: DEFAULT_CONTAMINATION }
    }
}

/// Per-kind hyperparameters; the variant determines the model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hyperparameters {
    NaiveBayes(NaiveBayesParams),
    LogisticRegression(LogisticParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    GradientBoosting(BoostingParams),
    NeuralNetwork(MlpParams),
    Autoencoder(AutoencoderParams),
    IsolationForest(IsolationParams),
}

impl Hyperparameters {
    pub fn defaults(kind: ModelKind) -> Self {
        match kind {
            ModelKind::NaiveBayes => Self::NaiveBayes(Default::default()),
            ModelKind::LogisticRegression => Self::LogisticRegression(Default::default()),
            ModelKind::DecisionTree => Self::DecisionTree(Default::default()),
            ModelKind::RandomForest => Self::RandomForest(Default::default()),
            ModelKind::GradientBoosting => Self::GradientBoosting(Default::default()),
            ModelKind::NeuralNetwork => Self::NeuralNetwork(Default::default()),
            ModelKind::Autoencoder => Self::Autoencoder(Default::default()),
            ModelKind::IsolationForest => Self::IsolationForest(Default::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::NaiveBayes(_) => ModelKind::NaiveBayes,
            Self::LogisticRegression(_) => ModelKind::LogisticRegression,
            Self::DecisionTree(_) => ModelKind::DecisionTree,
            Self::RandomForest(_) => ModelKind::RandomForest,
            Self::GradientBoosting(_) => ModelKind::GradientBoosting,
            Self::NeuralNetwork(_) => ModelKind::NeuralNetwork,
            Self::Autoencoder(_) => ModelKind::Autoencoder,
            Self::IsolationForest(_) => ModelKind::IsolationForest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub params: Hyperparameters,
    pub seed: u64,
    /// Reweight classes to equal total weight. Off for reproduction runs;
    /// Naive Bayes and the unsupervised detectors ignore it.
    #[serde(default)]
    pub class_weighted: bool,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, seed: u64) -> Self {
        Self { params: Hyperparameters::defaults(kind), seed, class_weighted: false }
    }

    pub fn with_params(params: Hyperparameters, seed: u64) -> Self {
        Self { params, seed, class_weighted: false }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

/// Fitted model state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    NaiveBayes(NaiveBayes),
    LogisticRegression(LogisticRegression),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    NeuralNetwork(Network),
    Autoencoder(Network),
    IsolationForest(IsolationForest),
}

impl TrainedModel {
    #[inline]
    fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            Self::NaiveBayes(m) => m.fraud_probability(x),
            Self::LogisticRegression(m) => m.fraud_probability(x),
            Self::DecisionTree(m) => m.fraud_probability(x),
            Self::RandomForest(m) => m.fraud_probability(x),
            Self::GradientBoosting(m) => m.fraud_probability(x),
            Self::NeuralNetwork(m) | Self::Autoencoder(m) => m.score(x),
            Self::IsolationForest(m) => m.anomaly_score(x),
        }
    }
}

/// A trained model viewed as `encoded instance -> real score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreFunction {
    pub kind: ModelKind,
    pub semantics: ScoreSemantics,
    /// `evaluate(x) >= threshold` predicts fraud.
    pub threshold: f64,
    pub feature_names: Vec<String>,
    pub model: TrainedModel,
}

impl ScoreFunction {
    #[inline]
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.feature_names.len());
        self.model.evaluate(x)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict_binary(&self, x: &[f64]) -> u8 {
        u8::from(self.evaluate(x) >= self.threshold)
    }

    /// Row-wise [`Self::evaluate`], order preserved.
    pub fn batch_evaluate(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.evaluate_matrix(&data.matrix)
    }

    pub fn evaluate_matrix(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.rows() > 0 && x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), found: x.cols() });
        }
        Ok(x.iter_rows().map(|r| self.evaluate(r)).collect())
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    /// Encoded-scale coefficients and intercept of a logistic regression.
    pub fn logistic_coefficients(&self) -> Option<(&[f64], f64)> {
        match &self.model {
            TrainedModel::LogisticRegression(m) => Some((&m.coef, m.intercept)),
            _ => None,
        }
    }
}

pub fn predict_binary(sf: &ScoreFunction, instance: &[f64]) -> u8 {
    sf.predict_binary(instance)
}

pub fn batch_evaluate(sf: &ScoreFunction, data: &Dataset) -> Result<Vec<f64>> {
    sf.batch_evaluate(data)
}

fn sample_weights(labels: &[u8], balanced: bool) -> Vec<f64> {
    if !balanced {
        return alloc::vec![1.0; labels.len()];
    }
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    let neg = n - pos;
    labels
        .iter()
        .map(|&y| match y {
            1 if pos > 0.0 => n / (2.0 * pos),
            0 if neg > 0.0 => n / (2.0 * neg),
            _ => 1.0,
        })
        .collect()
}

/// Fits the model described by `spec`. Supervised kinds need labels; the
/// autoencoder and isolation forest ignore them.
pub fn train(spec: &ModelSpec, data: &Dataset) -> Result<ScoreFunction> {
    let kind = spec.kind();
    let x = &data.matrix;
    if x.rows() == 0 {
        return Err(Error::Empty("training data has no rows"));
    }
    let labels = if kind.is_supervised() { Some(data.labels()?) } else { None };
    let weights = labels.map(|l| sample_weights(l, spec.class_weighted));
    let mut threshold = 0.5;
    let model = match &spec.params {
        Hyperparameters::NaiveBayes(p) => TrainedModel::NaiveBayes(NaiveBayes::fit(data, labels.unwrap_or_default(), p)),
        Hyperparameters::LogisticRegression(p) => TrainedModel::LogisticRegression(LogisticRegression::fit(
            x,
            labels.unwrap_or_default(),
            weights.as_deref().unwrap_or_default(),
            p,
        )?),
        Hyperparameters::DecisionTree(p) => TrainedModel::DecisionTree(DecisionTree::fit(
            x,
            labels.unwrap_or_default(),
            weights.as_deref().unwrap_or_default(),
            p,
            spec.seed,
        )),
        Hyperparameters::RandomForest(p) => TrainedModel::RandomForest(RandomForest::fit(
            x,
            labels.unwrap_or_default(),
            weights.as_deref().unwrap_or_default(),
            p,
            spec.seed,
        )),
        Hyperparameters::GradientBoosting(p) => TrainedModel::GradientBoosting(GradientBoosting::fit(
            x,
            labels.unwrap_or_default(),
            weights.as_deref().unwrap_or_default(),
            p,
            spec.seed,
        )?),
        Hyperparameters::NeuralNetwork(p) => {
            let w = if spec.class_weighted { weights.as_deref() } else { None };
            TrainedModel::NeuralNetwork(network::train_network(x, labels, w, p, spec.seed)?)
        }
        Hyperparameters::Autoencoder(p) => {
            check_contamination(p.contamination)?;
            let net = network::train_network(x, None, None, &p.network, spec.seed)?;
            let scores: Vec<f64> = x.iter_rows().map(|r| net.score(r)).collect();
            threshold = crate::math::quantile(&scores, 1.0 - p.contamination);
            TrainedModel::Autoencoder(net)
        }
        Hyperparameters::IsolationForest(p) => {
            check_contamination(p.contamination)?;
            let forest = IsolationForest::fit(x, p, spec.seed);
            let scores: Vec<f64> = x.iter_rows().map(|r| forest.anomaly_score(r)).collect();
            threshold = crate::math::quantile(&scores, 1.0 - p.contamination);
            TrainedModel::IsolationForest(forest)
        }
    };
    Ok(ScoreFunction { kind, semantics: kind.semantics(), threshold, feature_names: feature_names(data), model })
}

fn check_contamination(c: f64) -> Result<()> {
    if c > 0.0 && c < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("contamination {c} not in (0, 0.5)")))
    }
}

fn feature_names(data: &Dataset) -> Vec<String> {
    if data.schema.len() == data.n_features() {
        data.schema.names()
    } else {
        (0..data.n_features()).map(|j| alloc::format!("f{j}")).collect()
    }
}

/// Anything that maps an encoded instance to a real score: trained models,
/// closures in tests, or wrappers around external predictors.
pub trait Scorer {
    fn n_features(&self) -> usize;

    fn score(&self, x: &[f64]) -> f64;

    /// `None` for black boxes of unknown output type.
    fn semantics(&self) -> Option<ScoreSemantics> {
        None
    }
}

impl Scorer for ScoreFunction {
    fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    #[inline]
    fn score(&self, x: &[f64]) -> f64 {
        self.evaluate(x)
    }

    fn semantics(&self) -> Option<ScoreSemantics> {
        Some(self.semantics)
    }
}

impl<T: Scorer + ?Sized> Scorer for &T {
    fn n_features(&self) -> usize {
        (**self).n_features()
    }

    fn score(&self, x: &[f64]) -> f64 {
        (**self).score(x)
    }

    fn semantics(&self) -> Option<ScoreSemantics> {
        (**self).semantics()
    }
}

/// Closure-backed [`Scorer`].
pub struct FnScorer<F> {
    n_features: usize,
    f: F,
    semantics: Option<ScoreSemantics>,
}

impl<F: Fn(&[f64]) -> f64> FnScorer<F> {
    pub fn new(n_features: usize, f: F) -> Self {
        Self { n_features, f, semantics: None }
    }

    pub fn with_semantics(mut self, semantics: ScoreSemantics) -> Self {
        self.semantics = Some(semantics);
        self
    }
}

impl<F: Fn(&[f64]) -> f64> Scorer for FnScorer<F> {
    fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    fn score(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn semantics(&self) -> Option<ScoreSemantics> {
        self.semantics
    }
}
