use fraudex_core::data::{encode, fit_schema, split, Cell, ColumnDecl, RawRecord};
use fraudex_core::explain::{rank, Attribution, Diagnostics, Method, RankedFeatures};
use fraudex_core::metrics::{auc, classification_report};
use proptest::prelude::*;

fn labels_and_scores() -> impl Strategy<Value = (Vec<u8>, Vec<f64>)> {
    (2usize..120).prop_flat_map(|n| {
        (prop::collection::vec(0u8..2, n), prop::collection::vec((0i32..40).prop_map(|v| v as f64 / 8.0), n))
            .prop_filter("both classes", |(l, _)| l.contains(&0) && l.contains(&1))
    })
}

fn pairwise_auc(labels: &[u8], scores: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
            }
        }
    }
    wins / pairs
}

fn attribution(phi: Vec<f64>) -> Attribution {
    Attribution {
        method: Method::ExactShapley,
        feature_names: (0..phi.len()).map(|j| format!("f{j}")).collect(),
        phi,
        base_value: 0.0,
        predicted_value: 0.0,
        diagnostics: Diagnostics::default(),
    }
}

proptest! {
    #[test]
    fn auc_matches_pairwise((labels, scores) in labels_and_scores()) {
        prop_assert!((auc(&labels, &scores).unwrap() - pairwise_auc(&labels, &scores)).abs() < 1e-12);
    }

    #[test]
    fn auc_flips_under_negation((labels, scores) in labels_and_scores()) {
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auc(&labels, &scores).unwrap() + auc(&labels, &neg).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn auc_invariant_under_monotone_maps((labels, scores) in labels_and_scores()) {
        let mapped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + 1.0).collect();
        prop_assert_eq!(auc(&labels, &scores).unwrap(), auc(&labels, &mapped).unwrap());
    }

    #[test]
    fn report_counts_partition(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..300)) {
        let (labels, preds): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let r = classification_report(&labels, &preds).unwrap();
        let c = r.confusion;
        prop_assert_eq!(c.tp + c.fp + c.tn + c.fn_, labels.len());
        prop_assert!((0.0..=1.0).contains(&r.f1) && (0.0..=1.0).contains(&r.macro_f1));
    }

    #[test]
    fn rank_is_scale_invariant(phi in prop::collection::vec(-5.0f64..5.0, 1..30), c in 1e-3f64..1e3, k in 1usize..40) {
        let scaled: Vec<f64> = phi.iter().map(|p| p * c).collect();
        let a = rank(&attribution(phi.clone()), k);
        let b = rank(&attribution(scaled), k);
        prop_assert_eq!(a.indices(), b.indices());
        prop_assert_eq!(a.entries.len(), k.min(phi.len()));
        let mags: Vec<f64> = a.entries.iter().map(|e| e.phi.abs()).collect();
        prop_assert!(mags.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn ties_rank_by_index(n in 1usize..20, v in 0.1f64..3.0) {
        let names: Vec<String> = (0..n).map(|j| format!("f{j}")).collect();
        let phi: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { v } else { -v }).collect();
        let ranked = RankedFeatures::from_scores(&names, &phi, n);
        prop_assert_eq!(ranked.indices(), (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn categorical_codes_roundtrip(values in prop::collection::vec(prop::option::of("[a-e]{1,2}"), 1..80)) {
        let records: Vec<RawRecord> = values
            .iter()
            .map(|v| RawRecord {
                values: vec![("c".into(), v.clone().map_or(Cell::Missing, Cell::Text))],
                label: None,
            })
            .collect();
        let schema = fit_schema(&records, &[ColumnDecl::categorical("c")]).unwrap();
        let data = encode(&records, &schema);
        for (i, v) in values.iter().enumerate() {
            let code = data.matrix.get(i, 0) as u32;
            prop_assert_eq!(schema.decode_category(0, code), v.as_deref());
        }
        let freqs: Vec<f64> = schema.category_map(0).unwrap().entries.iter().map(|e| e.frequency).collect();
        prop_assert!(freqs.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn split_partitions_rows(n_pos in 2usize..40, n_neg in 2usize..200, f in 0.05f64..0.95, seed in any::<u64>()) {
        let records: Vec<RawRecord> = (0..n_pos + n_neg)
            .map(|i| RawRecord { values: vec![("x".into(), Cell::Number(i as f64))], label: Some((i < n_pos) as u8) })
            .collect();
        let schema = fit_schema(&records, &[ColumnDecl::numeric("x")]).unwrap();
        let data = encode(&records, &schema);
        let (a, b) = split(&data, f, seed).unwrap();
        let mut ids: Vec<u64> = a.row_ids.iter().chain(&b.row_ids).copied().collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..(n_pos + n_neg) as u64).collect::<Vec<_>>());
        for label in [0u8, 1] {
            prop_assert!(!a.positions_with_label(label).unwrap().is_empty());
            prop_assert!(!b.positions_with_label(label).unwrap().is_empty());
        }
    }
}
