// Shared fixtures for the integration tests. Each test binary compiles its
// own copy, so unused helpers in any one binary are expected.
#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::{Array1, Array2};
use ovrlogit::dataset::{stratified_split, LabeledDataset, SplitPair};
use ovrlogit::preprocess::{fit_standardizer, transform, Standardizer};

pub fn wine_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/wine.csv")
}

pub fn wine() -> LabeledDataset {
    ovrlogit::dataset::load_csv(wine_path(), "target").expect("bundled wine.csv loads")
}

/// The default split used throughout: 20% test, seed 15.
pub fn wine_split() -> SplitPair {
    stratified_split(&wine(), 0.2, 15).expect("wine splits")
}

/// Default split plus fitted standardizer and the standardized training set.
pub fn standardized_wine() -> (SplitPair, Standardizer, LabeledDataset) {
    let split = wine_split();
    let standardizer = fit_standardizer(&split.train).expect("wine train standardizes");
    let train_std = transform(&standardizer, &split.train).expect("transform train");
    (split, standardizer, train_std)
}

/// Builds a dataset from row-major feature literals.
pub fn dataset_from(
    rows: &[&[f64]],
    labels: &[usize],
    class_count: usize,
) -> LabeledDataset {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let mut features = Array2::zeros((n, d));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            features[(i, j)] = v;
        }
    }
    LabeledDataset {
        features,
        labels: labels.to_vec(),
        feature_names: (0..d).map(|j| format!("f{j}")).collect(),
        class_count,
    }
}

/// Binary task from literals, for driving solvers directly.
pub fn binary_from(rows: &[&[f64]], targets: &[f64]) -> ovrlogit::dataset::BinaryDataset {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let mut features = Array2::zeros((n, d));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            features[(i, j)] = v;
        }
    }
    ovrlogit::dataset::BinaryDataset {
        features,
        targets: Array1::from(targets.to_vec()),
        positive_class: 1,
    }
}

/// Column index of a named feature.
pub fn column_index(ds: &LabeledDataset, name: &str) -> usize {
    ds.feature_names
        .iter()
        .position(|f| f == name)
        .unwrap_or_else(|| panic!("no feature named {name}"))
}
