use fraudex_core::data::{generate_synthetic, split, Dataset, SyntheticSpec};
use fraudex_core::explain::global_lr_importance;
use fraudex_core::metrics::auc;
use fraudex_core::models::{
    train, Hyperparameters, Loss, MlpParams, ModelKind, ModelSpec, Network, ScoreSemantics, TrainedModel,
};
use fraudex_core::{rng, Error, Matrix};
use rand::Rng;

fn synthetic(n: usize, seed: u64) -> Dataset {
    generate_synthetic(&SyntheticSpec::new(n, 6, 2, 0.1, seed)).unwrap().0
}

fn fast_spec(kind: ModelKind, seed: u64) -> ModelSpec {
    let mut params = Hyperparameters::defaults(kind);
    match &mut params {
        Hyperparameters::NeuralNetwork(p) => p.epochs = 5,
        Hyperparameters::Autoencoder(p) => p.network.epochs = 5,
        Hyperparameters::RandomForest(p) => p.n_estimators = 20,
        _ => {}
    }
    ModelSpec::with_params(params, seed)
}

#[test]
fn every_kind_trains_scores_and_is_deterministic() {
    let data = synthetic(600, 2);
    for kind in ModelKind::ALL {
        let a = train(&fast_spec(kind, 7), &data).unwrap();
        let b = train(&fast_spec(kind, 7), &data).unwrap();
        assert_eq!(a, b, "{kind}");
        assert_eq!(a.semantics, kind.semantics());
        let scores = a.batch_evaluate(&data).unwrap();
        let looped: Vec<f64> = data.matrix.iter_rows().map(|r| a.evaluate(r)).collect();
        assert_eq!(scores, looped, "{kind}");
        assert!(scores.iter().all(|s| s.is_finite()));
        if a.semantics == ScoreSemantics::FraudProbability {
            assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)), "{kind}");
        }
    }
}

#[test]
fn supervised_models_beat_chance() {
    let (train_set, valid) = split(&synthetic(3000, 4), 0.2, 1).unwrap();
    for kind in [ModelKind::NaiveBayes, ModelKind::LogisticRegression, ModelKind::DecisionTree, ModelKind::RandomForest] {
        let sf = train(&ModelSpec::new(kind, 3), &train_set).unwrap();
        let a = auc(valid.labels().unwrap(), &sf.batch_evaluate(&valid).unwrap()).unwrap();
        assert!(a > 0.65, "{kind}: auc {a}");
    }
}

#[test]
fn supervised_kind_needs_labels() {
    let mut data = synthetic(200, 1);
    data.labels = None;
    assert!(matches!(train(&ModelSpec::new(ModelKind::LogisticRegression, 0), &data), Err(Error::MissingLabels)));
    assert!(train(&fast_spec(ModelKind::IsolationForest, 0), &data).is_ok());
}

#[test]
fn decision_tree_solves_xor() {
    let rows: Vec<[f64; 2]> = (0..40).map(|i| [(i % 2) as f64, ((i / 2) % 2) as f64]).collect();
    let labels: Vec<u8> = rows.iter().map(|r| (r[0] != r[1]) as u8).collect();
    let data = Dataset { matrix: Matrix::from_rows(&rows), labels: Some(labels.clone()), ..synthetic_like(40, 2) };
    let sf = train(&ModelSpec::new(ModelKind::DecisionTree, 0), &data).unwrap();
    for (r, y) in rows.iter().zip(&labels) {
        assert_eq!(sf.predict_binary(r), *y);
    }
}

fn synthetic_like(n: usize, m: usize) -> Dataset {
    Dataset { matrix: Matrix::zeros(n, m), labels: None, schema: Default::default(), row_ids: (0..n as u64).collect() }
}

#[test]
fn naive_bayes_with_single_class() {
    let mut data = synthetic(100, 5);
    data.labels = Some(vec![0; 100]);
    let sf = train(&ModelSpec::new(ModelKind::NaiveBayes, 0), &data).unwrap();
    assert!(sf.batch_evaluate(&data).unwrap().iter().all(|&p| p == 0.0));
}

#[test]
fn logistic_recovers_generative_signs() {
    let (data, weights) = generate_synthetic(&SyntheticSpec::new(8000, 8, 0, 0.2, 12).with_informative(4)).unwrap();
    let sf = train(&ModelSpec::new(ModelKind::LogisticRegression, 0), &data).unwrap();
    let (coef, _) = sf.logistic_coefficients().unwrap();
    for t in &weights.terms {
        assert_eq!(coef[t.feature].signum(), t.weight.signum(), "{}", t.name);
        assert!((coef[t.feature] - t.weight).abs() < 0.35 * t.weight.abs(), "{}: {} vs {}", t.name, coef[t.feature], t.weight);
    }
    let ranked = global_lr_importance(&sf, &data, 6).unwrap();
    for t in &weights.terms {
        assert!(ranked.indices().contains(&t.feature));
    }
    let other = train(&ModelSpec::new(ModelKind::NaiveBayes, 0), &data).unwrap();
    assert!(matches!(global_lr_importance(&other, &data, 6), Err(Error::UnsupportedModel(_))));
}

#[test]
fn unsupervised_thresholds_flag_contamination_share() {
    let data = synthetic(2000, 8);
    for kind in [ModelKind::Autoencoder, ModelKind::IsolationForest] {
        let sf = train(&fast_spec(kind, 1), &data).unwrap();
        let flagged = data.matrix.iter_rows().filter(|r| sf.predict_binary(r) == 1).count() as f64 / 2000.0;
        assert!((flagged - 0.035).abs() < 0.01, "{kind}: {flagged}");
    }
}

#[test]
fn detectors_score_outliers_higher() {
    let data = synthetic(1500, 9);
    let outlier = vec![8.0; data.n_features()];
    for kind in [ModelKind::Autoencoder, ModelKind::IsolationForest] {
        let sf = train(&fast_spec(kind, 1), &data).unwrap();
        let scores = sf.batch_evaluate(&data).unwrap();
        let max = scores.iter().cloned().fold(f64::MIN, f64::max);
        assert!(sf.evaluate(&outlier) > max, "{kind}");
        assert_eq!(sf.predict_binary(&outlier), 1);
    }
}

#[test]
fn boosting_defaults_follow_configuration() {
    let Hyperparameters::GradientBoosting(p) = Hyperparameters::defaults(ModelKind::GradientBoosting) else { panic!() };
    assert_eq!((p.n_estimators, p.max_depth, p.learning_rate), (100, 12, 0.002));
    let sf = train(&ModelSpec::new(ModelKind::GradientBoosting, 0), &synthetic(500, 3)).unwrap();
    let TrainedModel::GradientBoosting(gb) = &sf.model else { panic!() };
    assert_eq!(gb.trees.len(), 100);
    assert!(gb.trees.iter().all(|t| t.depth() <= 12));
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt() + b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

fn finite_difference(net: &Network, inputs: &Matrix, targets: &Matrix) -> Vec<f64> {
    let p = net.parameters();
    let h = 1e-5;
    let mut probe = net.clone();
    (0..p.len())
        .map(|i| {
            let mut q = p.clone();
            q[i] = p[i] + h;
            probe.set_parameters(&q);
            let up = probe.loss_and_gradient(inputs, targets, None).0;
            q[i] = p[i] - h;
            probe.set_parameters(&q);
            let down = probe.loss_and_gradient(inputs, targets, None).0;
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[test]
fn network_gradients_match_finite_differences() {
    let mut r = rng::seeded(17);
    let inputs = Matrix::from_vec(10, 6, (0..60).map(|_| r.random::<f64>() * 2.0 - 1.0).collect());
    let labels = Matrix::from_vec(10, 1, (0..10).map(|i| (i % 3 == 0) as u8 as f64).collect());
    for (loss, n_out, targets) in [(Loss::CrossEntropy, 1, &labels), (Loss::MeanSquared, 6, &inputs)] {
        let net = Network::new(6, &MlpParams::default().hidden, n_out, loss, &mut r);
        let (_, analytic) = net.loss_and_gradient(&inputs, targets, None);
        let numeric = finite_difference(&net, &inputs, targets);
        let err = relative_error(&analytic, &numeric);
        assert!(err < 1e-4, "{loss:?}: relative error {err}");
    }
}
