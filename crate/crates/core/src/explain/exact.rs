use alloc::vec::Vec;

use super::{Attribution, CoalitionGame, Diagnostics, Method, ResolvedBackground};
use crate::math::binomial;
use crate::models::Scorer;
use crate::{Error, Result};

/// Largest feature count accepted by [`exact_shapley`].
pub const EXACT_MAX_FEATURES: usize = 12;

/// Brute-force Shapley values:
/// `phi_i = Σ_{S ∌ i} |S|! (M-|S|-1)! / M! · (v(S ∪ {i}) - v(S))`.
///
/// Costs `2^M · |background|` model evaluations; used as the oracle for
/// KernelSHAP.
pub fn exact_shapley<S: Scorer + ?Sized>(model: &S, instance: &[f64], background: &ResolvedBackground) -> Result<Attribution> {
    let m = model.n_features();
    if m > EXACT_MAX_FEATURES {
        return Err(Error::TooManyFeatures { features: m, limit: EXACT_MAX_FEATURES, method: "exact_shapley" });
    }
    if instance.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: instance.len() });
    }
    if background.is_empty() {
        return Err(Error::EmptyBackground("exact_shapley"));
    }
    let game = CoalitionGame::new(model, instance, &background.rows);
    let full_mask = (1usize << m) - 1;
    let mut buf = Vec::with_capacity(m);
    let mut v: Vec<f64> = (0..=full_mask).map(|mask| game.value(mask as u64, &mut buf)).collect();
    v[0] = game.empty_value();
    v[full_mask] = game.full_value();

    // 1 / (M · C(M-1, s)) = s! (M-s-1)! / M!
    let weight: Vec<f64> = (0..m).map(|s| 1.0 / (m as f64 * binomial(m - 1, s))).collect();
    let phi: Vec<f64> = (0..m)
        .map(|i| {
            let bit = 1usize << i;
            (0..=full_mask)
                .filter(|mask| mask & bit == 0)
                .map(|mask| weight[mask.count_ones() as usize] * (v[mask | bit] - v[mask]))
                .sum()
        })
        .collect();
    let mut attr = Attribution {
        method: Method::ExactShapley,
        feature_names: background.feature_names.clone(),
        phi,
        base_value: v[0],
        predicted_value: v[full_mask],
        diagnostics: Diagnostics {
            coalitions: Some((full_mask + 1).saturating_sub(2)),
            full_enumeration: Some(true),
            background_rows: Some(background.len()),
            ..Default::default()
        },
    };
    attr.diagnostics.local_accuracy_residual = Some(attr.local_accuracy_gap());
    Ok(attr)
}
