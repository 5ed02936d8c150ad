//! Single-instance feature attribution for any [`Scorer`](crate::models::Scorer).
//!
//! All three explainers use interventional masking: a coalition's value is
//! the mean score over hybrid rows that take the coalition's features from
//! the explained instance and the remaining features from each background
//! row.

mod attribution;
mod background;
mod exact;
mod game;
mod global;
mod kernel;
mod lime;

pub use attribution::{rank, Attribution, Diagnostics, Method, RankedEntry, RankedFeatures};
pub use background::{resolve_background, BackgroundSpec, BackgroundStrategy, ResolvedBackground, Subsample};
pub use exact::{exact_shapley, EXACT_MAX_FEATURES};
pub use game::CoalitionGame;
pub use global::global_lr_importance;
pub use kernel::{kernel_shap, shapley_kernel_weight, CoalitionBudget, KernelShapConfig, FULL_MAX_FEATURES};
pub use lime::{lime, LimeConfig};
