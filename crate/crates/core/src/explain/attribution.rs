use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    KernelShap,
    Lime,
    ExactShapley,
}

impl Method {
    pub fn slug(self) -> &'static str {
        match self {
            Method::KernelShap => "kernel_shap",
            Method::Lime => "lime",
            Method::ExactShapley => "exact_shapley",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.slug())
    }
}

impl core::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        [Method::KernelShap, Method::Lime, Method::ExactShapley]
            .into_iter()
            .find(|m| m.slug() == s)
            .ok_or_else(|| crate::Error::InvalidParameter(alloc::format!("unknown explanation method `{s}`")))
    }
}

/// Method-specific run information. Fields that do not apply are omitted
/// from serialized output.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Distinct non-trivial coalitions evaluated (empty and full excluded).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coalitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_enumeration: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background_rows: Option<usize>,
    /// Weighted RMS residual of the KernelSHAP regression.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
    /// `|base_value + Σ phi - predicted_value|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_accuracy_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surrogate_r2: Option<f64>,
    /// `|surrogate(instance) - predicted_value|` for LIME.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_features: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub method: Method,
    pub feature_names: Vec<String>,
    pub phi: Vec<f64>,
    /// Expected score over the background (SHAP) or surrogate intercept (LIME).
    pub base_value: f64,
    pub predicted_value: f64,
    pub diagnostics: Diagnostics,
}

impl Attribution {
    pub fn local_accuracy_gap(&self) -> f64 {
        (self.base_value + self.phi.iter().sum::<f64>() - self.predicted_value).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub feature_index: usize,
    pub feature_name: String,
    pub phi: f64,
    /// 1-based position by descending `|phi|`.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeatures {
    pub entries: Vec<RankedEntry>,
    pub k: usize,
}

impl RankedFeatures {
    pub fn from_scores(names: &[String], phi: &[f64], k: usize) -> Self {
        let mut order: Vec<usize> = (0..phi.len()).collect();
        // Stable sort keeps ascending index order among equal magnitudes.
        order.sort_by(|&a, &b| phi[b].abs().total_cmp(&phi[a].abs()));
        let entries = order
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(pos, j)| RankedEntry {
                feature_index: j,
                feature_name: names.get(j).cloned().unwrap_or_else(|| alloc::format!("f{j}")),
                phi: phi[j],
                rank: pos + 1,
            })
            .collect();
        Self { entries, k }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.feature_index).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.feature_name.as_str()).collect()
    }
}

/// Top-`k` features by `|phi|`, ties broken by ascending feature index.
pub fn rank(attr: &Attribution, k: usize) -> RankedFeatures {
    RankedFeatures::from_scores(&attr.feature_names, &attr.phi, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn attr(phi: Vec<f64>) -> Attribution {
        Attribution {
            method: Method::KernelShap,
            feature_names: (0..phi.len()).map(|j| alloc::format!("feature{j}")).collect(),
            phi,
            base_value: 0.0,
            predicted_value: 0.0,
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn orders_by_magnitude() {
        let r = rank(&attr(alloc::vec![0.5, -0.9, 0.1]), 2);
        assert_eq!(r.names(), ["feature1", "feature0"]);
        assert_eq!(r.entries[0].rank, 1);
    }

    #[test]
    fn ties_prefer_lower_index_and_k_clamps() {
        let r = rank(&attr(alloc::vec![0.2, -0.3, 0.3, 0.0]), 10);
        assert_eq!(r.indices(), [1, 2, 0, 3]);
        assert_eq!(r.entries.len(), 4);
        assert_eq!(r.entries[3].feature_name, "feature3".to_string());
    }
}
