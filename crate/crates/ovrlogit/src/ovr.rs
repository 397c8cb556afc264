//! One-vs-Rest composition: K binary models sharing one standardizer.

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::dataset::{ovr_encode, DatasetError, LabeledDataset};
use crate::preprocess::Standardizer;
use crate::solvers::{
    train_gd, train_l1, train_reference, FittedBinaryModel, GdConfig, L1Config, SolverError,
};

#[derive(Debug, Error)]
pub enum OvrError {
    #[error("encoding class {class}: {source}")]
    Encode {
        class: usize,
        source: DatasetError,
    },
    #[error("training class {class}: {source}")]
    Train {
        class: usize,
        source: SolverError,
    },
    #[error("expected {expected} features, got {got}")]
    FeatureCount { expected: usize, got: usize },
    #[error("model has no classes")]
    NoClasses,
}

/// Which binary solver to run for every class of the One-vs-Rest ensemble.
#[derive(Debug, Clone)]
pub enum SolverSpec {
    Gd(GdConfig),
    Reference { tolerance: f64, max_iterations: usize },
    L1(L1Config),
}

/// K one-vs-rest binary models plus the standardizer fitted on the same
/// training data. `models[k]` scores class k against the rest.
#[derive(Debug, Clone)]
pub struct OvrModel {
    pub models: Vec<FittedBinaryModel>,
    pub standardizer: Standardizer,
    pub class_count: usize,
    pub feature_names: Vec<String>,
}

/// Trains one binary model per class on already-standardized training data.
/// The standardizer that produced that data rides along so the fitted model
/// can score raw feature vectors.
pub fn train_ovr(
    train_std: &LabeledDataset,
    standardizer: Standardizer,
    spec: &SolverSpec,
) -> Result<OvrModel, OvrError> {
    let mut models = Vec::with_capacity(train_std.class_count);
    for k in 0..train_std.class_count {
        let bds = ovr_encode(train_std, k).map_err(|source| OvrError::Encode { class: k, source })?;
        let fitted = match spec {
            SolverSpec::Gd(cfg) => train_gd(&bds, cfg),
            SolverSpec::Reference {
                tolerance,
                max_iterations,
            } => train_reference(&bds, *tolerance, *max_iterations),
            SolverSpec::L1(cfg) => train_l1(&bds, cfg),
        }
        .map_err(|source| OvrError::Train { class: k, source })?;
        models.push(fitted);
    }
    Ok(OvrModel {
        models,
        standardizer,
        class_count: train_std.class_count,
        feature_names: train_std.feature_names.clone(),
    })
}

impl OvrModel {
    pub fn d(&self) -> usize {
        self.standardizer.d()
    }

    /// Per-class sigmoid scores for raw (unstandardized) rows; one row per
    /// input, one column per class. The columns are independent binary
    /// probabilities, deliberately not normalized across classes.
    pub fn predict_proba(&self, features: &Array2<f64>) -> Result<Array2<f64>, OvrError> {
        if features.ncols() != self.d() {
            return Err(OvrError::FeatureCount {
                expected: self.d(),
                got: features.ncols(),
            });
        }
        if self.models.is_empty() {
            return Err(OvrError::NoClasses);
        }
        let n = features.nrows();
        let mut probs = Array2::zeros((n, self.class_count));
        let mut row = vec![0.0f64; self.d()];
        for i in 0..n {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = features[(i, j)];
            }
            self.standardizer.apply_row(&mut row);
            let x = Array1::from(row.clone());
            for (k, model) in self.models.iter().enumerate() {
                probs[(i, k)] = model.probability(&x);
            }
        }
        Ok(probs)
    }

    /// Predicted class per raw row: the class whose binary model claims the
    /// highest probability, lowest class index winning ties.
    pub fn predict(&self, features: &Array2<f64>) -> Result<Vec<usize>, OvrError> {
        let probs = self.predict_proba(features)?;
        Ok(argmax_rows(&probs))
    }
}

/// First index attaining each row's maximum.
pub fn argmax_rows(probs: &Array2<f64>) -> Vec<usize> {
    probs
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0usize;
            let mut best_val = row[0];
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > best_val {
                    best_val = v;
                    best = k;
                }
            }
            best
        })
        .collect()
}
