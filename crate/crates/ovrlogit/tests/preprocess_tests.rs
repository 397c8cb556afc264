mod common;

use common::{column_index, dataset_from, wine_split};
use ovrlogit::preprocess::{fit_standardizer, transform, PreprocessError, Standardizer};
use proptest::prelude::*;

#[test]
fn wine_proline_stats_match_a_two_pass_oracle() {
    let split = wine_split();
    let j = column_index(&split.train, "proline");
    let s = fit_standardizer(&split.train).unwrap();

    // Independent two-pass recomputation: sum then squared deviations.
    let n = split.train.n() as f64;
    let col: Vec<f64> = split.train.features.column(j).iter().copied().collect();
    let mean = col.iter().sum::<f64>() / n;
    let std = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();

    assert!((s.means[j] - mean).abs() <= 1e-9 * mean.abs());
    assert!((s.stds[j] - std).abs() <= 1e-9 * std.abs());
    // Raw-unit sanity: proline is the large-scale column of this dataset.
    assert!(mean > 500.0 && mean < 1000.0, "mean {mean}");
    assert!(std > 200.0 && std < 500.0, "std {std}");
}

#[test]
fn two_point_column_has_mean_one_std_one() {
    let ds = dataset_from(&[&[0.0], &[2.0]], &[0, 1], 2);
    let s = fit_standardizer(&ds).unwrap();
    assert_eq!(s.means[0], 1.0);
    assert_eq!(s.stds[0], 1.0);
}

#[test]
fn constant_column_error_names_the_column() {
    let ds = dataset_from(&[&[1.0, 4.0], &[2.0, 4.0], &[3.0, 4.0]], &[0, 1, 0], 2);
    match fit_standardizer(&ds) {
        Err(PreprocessError::ZeroVariance(name)) => assert_eq!(name, "f1"),
        other => panic!("expected ZeroVariance, got {other:?}"),
    }
    let msg = fit_standardizer(&ds).unwrap_err().to_string();
    assert!(msg.contains("zero variance") && msg.contains("f1"), "{msg}");
}

#[test]
fn single_row_cannot_be_fit() {
    let ds = dataset_from(&[&[1.0]], &[0], 1);
    assert!(matches!(
        fit_standardizer(&ds),
        Err(PreprocessError::TooFewRows(1))
    ));
}

#[test]
fn transformed_training_data_has_zero_mean_unit_std() {
    let split = wine_split();
    let s = fit_standardizer(&split.train).unwrap();
    let train_std = transform(&s, &split.train).unwrap();
    let n = train_std.n() as f64;
    for j in 0..train_std.d() {
        let col = train_std.features.column(j);
        let mean = col.sum() / n;
        let std = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-9, "column {j} mean {mean}");
        assert!((std - 1.0).abs() < 1e-9, "column {j} std {std}");
    }
}

#[test]
fn transform_keeps_labels_names_and_class_count() {
    let split = wine_split();
    let s = fit_standardizer(&split.train).unwrap();
    let out = transform(&s, &split.train).unwrap();
    assert_eq!(out.labels, split.train.labels);
    assert_eq!(out.feature_names, split.train.feature_names);
    assert_eq!(out.class_count, split.train.class_count);
}

#[test]
fn identity_standardizer_changes_nothing() {
    let ds = dataset_from(&[&[3.0, -1.0], &[0.5, 8.0]], &[0, 1], 2);
    let s = Standardizer::identity(2);
    let out = transform(&s, &ds).unwrap();
    assert_eq!(out.features, ds.features);
}

#[test]
fn row_equal_to_the_means_maps_to_zeros() {
    let split = wine_split();
    let s = fit_standardizer(&split.train).unwrap();
    let mut row = s.means.clone();
    s.apply_row(&mut row);
    for (j, v) in row.iter().enumerate() {
        assert_eq!(*v, 0.0, "column {j}");
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let ds = dataset_from(&[&[1.0, 2.0], &[3.0, 4.0]], &[0, 1], 2);
    let s = Standardizer::identity(3);
    assert!(matches!(
        transform(&s, &ds),
        Err(PreprocessError::DimensionMismatch { fitted: 3, got: 2 })
    ));
}

#[test]
fn round_trip_recovers_raw_values() {
    let split = wine_split();
    let s = fit_standardizer(&split.train).unwrap();
    let train_std = transform(&s, &split.train).unwrap();
    let back = s.inverse_transform_matrix(&train_std.features);
    for (orig, rec) in split.train.features.iter().zip(back.iter()) {
        let tol = 1e-12 * orig.abs().max(1.0);
        assert!((orig - rec).abs() <= tol, "{orig} vs {rec}");
    }
}

#[test]
fn test_columns_keep_train_statistics_not_their_own() {
    // Standardizing the test set with training statistics should generally
    // leave nonzero column means — the guard against refitting on test data.
    let split = wine_split();
    let s = fit_standardizer(&split.train).unwrap();
    let test_std = transform(&s, &split.test).unwrap();
    let n = test_std.n() as f64;
    let max_abs_mean = (0..test_std.d())
        .map(|j| (test_std.features.column(j).sum() / n).abs())
        .fold(0.0f64, f64::max);
    assert!(max_abs_mean > 0.01, "max |test column mean| {max_abs_mean}");
}

proptest! {
    // transform then inverse_transform_matrix is the identity within float noise.
    #[test]
    fn round_trip_property(
        cells in proptest::collection::vec(-1e3f64..1e3, 8),
        spread in 0.5f64..50.0,
    ) {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| vec![cells[2 * i], cells[2 * i + 1] * spread])
            .collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let ds = dataset_from(&refs, &[0, 1, 0, 1], 2);
        let Ok(s) = fit_standardizer(&ds) else {
            // Randomly identical column values: legitimately unfittable.
            return Ok(());
        };
        let fwd = transform(&s, &ds).unwrap();
        let back = s.inverse_transform_matrix(&fwd.features);
        for (orig, rec) in ds.features.iter().zip(back.iter()) {
            let tol = 1e-9 * orig.abs().max(1.0);
            prop_assert!((orig - rec).abs() <= tol, "{} vs {}", orig, rec);
        }
    }
}
