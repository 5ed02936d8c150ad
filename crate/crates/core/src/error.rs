use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("column `{0}` is declared but missing from the records")]
    MissingColumn(String),
    #[error("column `{column}` is declared numeric but {fraction:.1}% of its cells are non-numeric")]
    LikelyMisdeclared { column: String, fraction: f64 },
    #[error("operation requires labels but the dataset is unlabeled")]
    MissingLabels,
    #[error("class {label} has {count} rows; at least 2 are required")]
    ClassTooSmall { label: u8, count: usize },
    #[error("only {found} fraud rows generated; at least {required} are required")]
    TooFewFraudRows { found: usize, required: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{model} training diverged (non-finite loss) at iteration {iteration}")]
    Divergence { model: &'static str, iteration: usize },
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("{coalitions} coalitions cannot determine {features} attributions (need at least {required})")]
    Underdetermined { coalitions: usize, features: usize, required: usize },
    #[error("{features} features exceeds the limit of {limit} for {method}")]
    TooManyFeatures { features: usize, limit: usize, method: &'static str },
    #[error("background dataset is empty after applying the `{0}` filter")]
    EmptyBackground(&'static str),
    #[error("background sample of {requested} rows requested but only {available} are available")]
    BackgroundTooLarge { requested: usize, available: usize },
    #[error("all {0} perturbation outputs are identical; the surrogate fit is degenerate")]
    DegenerateSurrogate(usize),
    #[error("linear system is singular")]
    Singular,
}
