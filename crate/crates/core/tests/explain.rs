use fraudex_core::data::{generate_synthetic, SyntheticSpec};
use fraudex_core::explain::{
    exact_shapley, kernel_shap, lime, rank, resolve_background, BackgroundSpec, CoalitionBudget,
    KernelShapConfig, LimeConfig, ResolvedBackground,
};
use fraudex_core::models::{train, FnScorer, ModelKind, ModelSpec, ScoreSemantics};
use fraudex_core::{Error, Matrix};

fn single_row(row: &[f64]) -> ResolvedBackground {
    ResolvedBackground::from_rows(Matrix::from_rows(&[row]))
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol, "index {i}: {x} vs {y} (tol {tol})");
    }
}

// With a zero background row and an all-ones instance, v(S) = f(1_S), so
// the game can be tabulated by hand.
#[test]
fn glove_game_matches_hand_values() {
    // One left glove (player 0), two right gloves (1, 2), player 3 is a dummy.
    let f = FnScorer::new(4, |x: &[f64]| x[0].min(x[1].max(x[2])));
    let bg = single_row(&[0.0; 4]);
    let x = [1.0; 4];
    let expected = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 0.0];
    let exact = exact_shapley(&f, &x, &bg).unwrap();
    assert_close(&exact.phi, &expected, 1e-12);
    let kernel = kernel_shap(&f, &x, &bg, &KernelShapConfig::full()).unwrap();
    assert_close(&kernel.phi, &expected, 1e-10);
    assert_eq!(kernel.diagnostics.coalitions, Some(14));
}

#[test]
fn interaction_split_evenly() {
    let f = FnScorer::new(4, |x: &[f64]| x[0] * x[1] + 2.0 * x[2]);
    let bg = single_row(&[0.0; 4]);
    let exact = exact_shapley(&f, &[1.0; 4], &bg).unwrap();
    assert_close(&exact.phi, &[0.5, 0.5, 2.0, 0.0], 1e-12);
}

#[test]
fn linear_model_closed_form() {
    let w = [0.7, -1.3, 0.0, 2.1, 0.4, -0.2];
    let f = FnScorer::new(6, move |x: &[f64]| 0.3 + x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>());
    let rows: Vec<Vec<f64>> = (0..7).map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 5) as f64 - 2.0).collect()).collect();
    let bg = ResolvedBackground::from_rows(Matrix::from_rows(&rows));
    let x = [1.5, -0.5, 3.0, 0.25, -2.0, 1.0];
    let expected: Vec<f64> = (0..6)
        .map(|j| w[j] * (x[j] - rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64))
        .collect();
    for cfg in [KernelShapConfig::full(), KernelShapConfig { budget: CoalitionBudget::Samples(20), seed: 5 }] {
        let attr = kernel_shap(&f, &x, &bg, &cfg).unwrap();
        assert_close(&attr.phi, &expected, 1e-9);
        assert!(attr.local_accuracy_gap() < 1e-9);
    }
}

fn nonlinear(x: &[f64]) -> f64 {
    let z = 0.8 * x[0] - x[1] * x[2] + 0.5 * x[3] * x[3] - 0.3 * x[4] + (x[5] * x[0]).tanh();
    1.0 / (1.0 + (-z).exp())
}

fn nonlinear_background() -> ResolvedBackground {
    let rows: Vec<Vec<f64>> = (0..12).map(|i| (0..8).map(|j| (((i * 5 + j * 11) % 9) as f64 - 4.0) / 3.0).collect()).collect();
    ResolvedBackground::from_rows(Matrix::from_rows(&rows))
}

#[test]
fn full_kernel_equals_exact_on_nonlinear_model() {
    let f = FnScorer::new(8, nonlinear);
    let bg = nonlinear_background();
    let x = [1.0, -0.5, 0.8, 1.2, -1.0, 0.3, 2.0, -2.0];
    let exact = exact_shapley(&f, &x, &bg).unwrap();
    let kernel = kernel_shap(&f, &x, &bg, &KernelShapConfig::full()).unwrap();
    assert_close(&kernel.phi, &exact.phi, 1e-9);
    // Features 6 and 7 never enter the model.
    assert!(exact.phi[6].abs() < 1e-12 && exact.phi[7].abs() < 1e-12);
    assert!((kernel.base_value - exact.base_value).abs() < 1e-12);
    assert!(kernel.local_accuracy_gap() < 1e-9);
}

#[test]
fn sampled_kernel_converges_and_is_deterministic() {
    let f = FnScorer::new(8, nonlinear);
    let bg = nonlinear_background();
    let x = [1.0, -0.5, 0.8, 1.2, -1.0, 0.3, 2.0, -2.0];
    let exact = exact_shapley(&f, &x, &bg).unwrap();
    let cfg = KernelShapConfig { budget: CoalitionBudget::Samples(200), seed: 9 };
    let a = kernel_shap(&f, &x, &bg, &cfg).unwrap();
    let b = kernel_shap(&f, &x, &bg, &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.local_accuracy_gap() < 1e-9);
    assert_close(&a.phi, &exact.phi, 0.02);
    assert_eq!(a.diagnostics.full_enumeration, Some(false));
}

#[test]
fn kernel_rejects_small_budgets_and_empty_background() {
    let f = FnScorer::new(5, |x: &[f64]| x[0]);
    let bg = single_row(&[0.0; 5]);
    let err = kernel_shap(&f, &[1.0; 5], &bg, &KernelShapConfig { budget: CoalitionBudget::Samples(6), seed: 0 });
    assert!(matches!(err, Err(Error::Underdetermined { required: 7, .. })));
    let empty = ResolvedBackground::from_rows(Matrix::zeros(0, 5));
    assert!(matches!(kernel_shap(&f, &[1.0; 5], &empty, &KernelShapConfig::full()), Err(Error::EmptyBackground(_))));
    let wide = FnScorer::new(13, |_: &[f64]| 0.0);
    assert!(matches!(exact_shapley(&wide, &[0.0; 13], &single_row(&[0.0; 13])), Err(Error::TooManyFeatures { .. })));
}

#[test]
fn lime_recovers_linear_direction() {
    let (data, _) = generate_synthetic(&SyntheticSpec::new(2000, 6, 0, 0.2, 3)).unwrap();
    let f = FnScorer::new(6, |x: &[f64]| 0.5 + 0.2 * x[1] - 0.05 * x[4]).with_semantics(ScoreSemantics::FraudProbability);
    let x = data.matrix.row(0).to_vec();
    let cfg = LimeConfig { top_k: 2, n_perturbations: 2000, ..Default::default() };
    let attr = lime(&f, &x, &data, &cfg).unwrap();
    let top = rank(&attr, 2).indices();
    assert_eq!(top, vec![1, 4]);
    assert!(attr.phi[1] > 0.0 && attr.phi[4] < 0.0);
    assert!(attr.diagnostics.surrogate_r2.unwrap() > 0.99);
    assert!(attr.diagnostics.discrepancy.unwrap() < 1e-6);
    assert_eq!(attr, lime(&f, &x, &data, &cfg).unwrap());
}

#[test]
fn lime_refuses_detectors_and_constant_models() {
    let (data, _) = generate_synthetic(&SyntheticSpec::new(300, 3, 1, 0.2, 1)).unwrap();
    let x = data.matrix.row(0).to_vec();
    let recon = FnScorer::new(4, |_: &[f64]| 1.0).with_semantics(ScoreSemantics::ReconstructionError);
    assert!(matches!(lime(&recon, &x, &data, &LimeConfig::default()), Err(Error::UnsupportedModel(_))));
    let flat = FnScorer::new(4, |_: &[f64]| 0.25);
    assert!(matches!(lime(&flat, &x, &data, &LimeConfig::default()), Err(Error::DegenerateSurrogate(_))));
}

#[test]
fn kernel_shap_on_trained_model_with_resolved_background() {
    let (data, _) = generate_synthetic(&SyntheticSpec::new(600, 5, 2, 0.1, 11)).unwrap();
    let model = train(&ModelSpec::new(ModelKind::RandomForest, 1), &data).unwrap();
    let bg = resolve_background(&BackgroundSpec::normal_only().sampled(40, 2), &data).unwrap();
    assert_eq!(bg.len(), 40);
    let x = data.matrix.row(data.positions_with_label(1).unwrap()[0]);
    let exact = exact_shapley(&model, x, &bg).unwrap();
    let kernel = kernel_shap(&model, x, &bg, &KernelShapConfig::full()).unwrap();
    assert_close(&kernel.phi, &exact.phi, 1e-9);
    assert_eq!(kernel.feature_names, data.feature_names());
}
