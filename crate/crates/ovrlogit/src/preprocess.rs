//! Per-feature z-score standardization fitted on training data only.

use ndarray::Array2;
use thiserror::Error;

use crate::dataset::LabeledDataset;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("need at least 2 rows to fit a standardizer, got {0}")]
    TooFewRows(usize),
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("dimension mismatch: standardizer has {fitted} features, data has {got}")]
    DimensionMismatch { fitted: usize, got: usize },
}

/// Column means and population standard deviations of the fitting data.
#[derive(Debug, Clone)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn d(&self) -> usize {
        self.means.len()
    }

    /// The identity transform for `d` features (zero mean, unit std).
    pub fn identity(d: usize) -> Standardizer {
        Standardizer {
            means: vec![0.0; d],
            stds: vec![1.0; d],
        }
    }

    /// Standardize a single raw row in place.
    pub fn apply_row(&self, x: &mut [f64]) {
        for (j, v) in x.iter_mut().enumerate() {
            *v = (*v - self.means[j]) / self.stds[j];
        }
    }

    /// Map a standardized matrix back to raw units.
    pub fn inverse_transform_matrix(&self, m: &Array2<f64>) -> Array2<f64> {
        let mut out = m.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * self.stds[j] + self.means[j];
            }
        }
        out
    }
}

/// Column statistics of the training features: mean and population (1/n)
/// standard deviation. Constant columns are rejected because the transform
/// would divide by zero.
pub fn fit_standardizer(train: &LabeledDataset) -> Result<Standardizer, PreprocessError> {
    let n = train.n();
    if n < 2 {
        return Err(PreprocessError::TooFewRows(n));
    }
    let d = train.d();
    let mut means = Vec::with_capacity(d);
    let mut stds = Vec::with_capacity(d);
    for j in 0..d {
        let col = train.features.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if std == 0.0 {
            return Err(PreprocessError::ZeroVariance(train.feature_names[j].clone()));
        }
        means.push(mean);
        stds.push(std);
    }
    Ok(Standardizer { means, stds })
}

/// Apply fitted statistics: `x'[j] = (x[j] - mean[j]) / std[j]`. Labels and
/// names pass through unchanged.
pub fn transform(s: &Standardizer, ds: &LabeledDataset) -> Result<LabeledDataset, PreprocessError> {
    if ds.d() != s.d() {
        return Err(PreprocessError::DimensionMismatch {
            fitted: s.d(),
            got: ds.d(),
        });
    }
    let mut features = ds.features.clone();
    for mut row in features.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - s.means[j]) / s.stds[j];
        }
    }
    Ok(LabeledDataset {
        features,
        labels: ds.labels.clone(),
        feature_names: ds.feature_names.clone(),
        class_count: ds.class_count,
    })
}
