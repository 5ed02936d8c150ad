//! KernelSHAP: Shapley values as the solution of a weighted least-squares
//! problem over coalitions.
//!
//! With `y(S) = v(S) - v(∅)`, the attributions minimize
//! `Σ_S k(|S|) (y(S) - Σ_{j∈S} phi_j)^2` subject to
//! `Σ phi = v(full) - v(∅)`, where `k(s) = (M-1) / (C(M,s) s (M-s))` is the
//! Shapley kernel. The empty and full coalitions (infinite kernel weight)
//! enter as equality constraints: the last feature's attribution is
//! eliminated by substitution, leaving an `(M-1)`-dimensional unconstrained
//! problem. Enumerating every coalition yields exact Shapley values.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Attribution, CoalitionGame, Diagnostics, Method, ResolvedBackground};
use crate::linalg::solve_spd;
use crate::math::binomial;
use crate::models::Scorer;
use crate::{Error, Result};

/// Largest feature count for which full enumeration is allowed.
pub const FULL_MAX_FEATURES: usize = 20;
const MASK_MAX_FEATURES: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalitionBudget {
    /// All `2^M - 2` non-trivial coalitions.
    Full,
    /// Sampled coalitions (paired with their complements). Budgets of at
    /// least `2^M - 2` switch to full enumeration.
    Samples(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelShapConfig {
    pub budget: CoalitionBudget,
    pub seed: u64,
}

impl KernelShapConfig {
    /// `2M + 2048` sampled coalitions.
    pub fn default_for(n_features: usize, seed: u64) -> Self {
        Self { budget: CoalitionBudget::Samples(2 * n_features + 2048), seed }
    }

    pub fn full() -> Self {
        Self { budget: CoalitionBudget::Full, seed: 0 }
    }
}

/// Shapley kernel weight of a coalition of size `s` among `m` players.
pub fn shapley_kernel_weight(m: usize, s: usize) -> f64 {
    (m - 1) as f64 / (binomial(m, s) * s as f64 * (m - s) as f64)
}

/// Coalition plan: distinct masks with their regression weights, in
/// ascending mask order.
fn plan(m: usize, budget: CoalitionBudget, seed: u64) -> Result<(Vec<(u64, f64)>, bool)> {
    let n_nontrivial = if m < 64 { (1u64 << m).saturating_sub(2) } else { u64::MAX };
    let full = match budget {
        CoalitionBudget::Full => {
            if m > FULL_MAX_FEATURES {
                return Err(Error::TooManyFeatures { features: m, limit: FULL_MAX_FEATURES, method: "full coalition enumeration" });
            }
            true
        }
        CoalitionBudget::Samples(n) => {
            if n < m + 2 {
                return Err(Error::Underdetermined { coalitions: n, features: m, required: m + 2 });
            }
            n as u64 >= n_nontrivial
        }
    };
    if full {
        let all = (1..=n_nontrivial).map(|mask| (mask, shapley_kernel_weight(m, mask.count_ones() as usize))).collect();
        return Ok((all, true));
    }
    let CoalitionBudget::Samples(n) = budget else { unreachable!() };
    // Size s is drawn with probability proportional to its total kernel
    // mass (M-1)/(s(M-s)); members are then uniform, so sample counts are
    // the regression weights.
    let size_mass: Vec<f64> = (1..m).map(|s| 1.0 / (s * (m - s)) as f64).collect();
    let total: f64 = size_mass.iter().sum();
    let all_bits = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut rng = crate::rng::seeded(seed);
    let mut counts: BTreeMap<u64, f64> = BTreeMap::new();
    let mut drawn = 0;
    while drawn < n {
        let mut u = rng.random::<f64>() * total;
        let mut s = 1;
        while s < m - 1 && u >= size_mass[s - 1] {
            u -= size_mass[s - 1];
            s += 1;
        }
        let mut mask = 0u64;
        for j in rand::seq::index::sample(&mut rng, m, s) {
            mask |= 1 << j;
        }
        *counts.entry(mask).or_default() += 1.0;
        drawn += 1;
        if drawn < n {
            *counts.entry(all_bits & !mask).or_default() += 1.0;
            drawn += 1;
        }
    }
    Ok((counts.into_iter().collect(), false))
}

pub fn kernel_shap<S: Scorer + ?Sized>(
    model: &S,
    instance: &[f64],
    background: &ResolvedBackground,
    config: &KernelShapConfig,
) -> Result<Attribution> {
    let m = model.n_features();
    if instance.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: instance.len() });
    }
    if background.is_empty() {
        return Err(Error::EmptyBackground("kernel_shap"));
    }
    if background.rows.cols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: background.rows.cols() });
    }
    if m > MASK_MAX_FEATURES {
        return Err(Error::TooManyFeatures { features: m, limit: MASK_MAX_FEATURES, method: "kernel_shap" });
    }
    let game = CoalitionGame::new(model, instance, &background.rows);
    let base = game.empty_value();
    let predicted = game.full_value();
    let total = predicted - base;
    let mut diagnostics = Diagnostics { background_rows: Some(background.len()), ..Default::default() };

    let phi = match m {
        0 => Vec::new(),
        1 => alloc::vec![total],
        _ => {
            let (coalitions, full) = plan(m, config.budget, config.seed)?;
            // Plan first, then evaluate; evaluation order cannot change the result.
            let mut buf = Vec::with_capacity(m);
            let values: Vec<f64> = coalitions.iter().map(|&(mask, _)| game.value(mask, &mut buf)).collect();

            let last = m - 1;
            let dim = m - 1;
            let mut a = alloc::vec![0.0; dim * dim];
            let mut b = alloc::vec![0.0; dim];
            let mut row = alloc::vec![0.0; dim];
            for (&(mask, w), &v) in coalitions.iter().zip(&values) {
                let z_last = (mask >> last & 1) as f64;
                let target = (v - base) - z_last * total;
                for (j, r) in row.iter_mut().enumerate() {
                    *r = (mask >> j & 1) as f64 - z_last;
                }
                for i in 0..dim {
                    if row[i] == 0.0 {
                        continue;
                    }
                    let wi = w * row[i];
                    b[i] += wi * target;
                    for j in 0..dim {
                        a[i * dim + j] += wi * row[j];
                    }
                }
            }
            let reduced = solve_spd(&a, &b)?;
            let mut phi = reduced.clone();
            phi.push(total - reduced.iter().sum::<f64>());

            let (mut rss, mut wsum) = (0.0, 0.0);
            for (&(mask, w), &v) in coalitions.iter().zip(&values) {
                let fitted: f64 = (0..m).filter(|&j| mask >> j & 1 == 1).map(|j| phi[j]).sum();
                let r = (v - base) - fitted;
                rss += w * r * r;
                wsum += w;
            }
            diagnostics.coalitions = Some(coalitions.len());
            diagnostics.full_enumeration = Some(full);
            diagnostics.fit_residual = Some(crate::math::sqrt(rss / wsum));
            phi
        }
    };
    let attr = Attribution {
        method: Method::KernelShap,
        feature_names: background.feature_names.clone(),
        phi,
        base_value: base,
        predicted_value: predicted,
        diagnostics,
    };
    let gap = attr.local_accuracy_gap();
    let mut attr = attr;
    attr.diagnostics.local_accuracy_residual = Some(gap);
    Ok(attr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_weight_is_symmetric() {
        for s in 1..8 {
            assert_eq!(shapley_kernel_weight(8, s), shapley_kernel_weight(8, 8 - s));
        }
        // (M-1) / (C(4,1) * 1 * 3) = 3 / 12
        assert_eq!(shapley_kernel_weight(4, 1), 0.25);
    }

    #[test]
    fn plan_counts() {
        let (full, is_full) = plan(5, CoalitionBudget::Full, 0).unwrap();
        assert!(is_full);
        assert_eq!(full.len(), 30);
        let (sampled, is_full) = plan(10, CoalitionBudget::Samples(100), 3).unwrap();
        assert!(!is_full);
        assert_eq!(sampled.iter().map(|(_, w)| w).sum::<f64>(), 100.0);
        let (_, is_full) = plan(4, CoalitionBudget::Samples(14), 3).unwrap();
        assert!(is_full);
    }

    #[test]
    fn plan_errors() {
        assert!(matches!(plan(8, CoalitionBudget::Samples(9), 0), Err(Error::Underdetermined { .. })));
        assert!(matches!(plan(21, CoalitionBudget::Full, 0), Err(Error::TooManyFeatures { .. })));
    }
}
