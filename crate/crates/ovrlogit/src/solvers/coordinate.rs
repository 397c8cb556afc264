//! Cyclic coordinate descent for L1-penalized logistic regression.

use ndarray::Array1;

use crate::dataset::BinaryDataset;

use super::{
    sigmoid, soft_threshold, FittedBinaryModel, Hyperparams, L1Config, SolverError, SolverTag,
};

/// Minimizes mean log loss plus `lambda * ||w||_1` with `lambda = 1 / (C * n)`,
/// sweeping coordinates cyclically (weights in index order, then the
/// unpenalized bias). Each coordinate takes one proximal step using the
/// curvature bound `p(1-p) <= 1/4`; a sweep whose largest coordinate change
/// falls below the tolerance ends the run.
pub fn train_l1(bds: &BinaryDataset, cfg: &L1Config) -> Result<FittedBinaryModel, SolverError> {
    if cfg.c <= 0.0 || !cfg.c.is_finite() {
        return Err(SolverError::InvalidConfig(format!(
            "inverse regularization strength C must be positive and finite, got {}",
            cfg.c
        )));
    }
    if cfg.tolerance <= 0.0 {
        return Err(SolverError::InvalidConfig(format!(
            "tolerance must be positive, got {}",
            cfg.tolerance
        )));
    }
    let n = bds.n();
    let d = bds.d();
    let nf = n as f64;
    let lambda = 1.0 / (cfg.c * nf);

    // Curvature bounds: max of p(1-p) is 1/4, so (1/4n) * sum x_ij^2 bounds the
    // per-coordinate second derivative. Constant columns of zeros get no bound
    // and are skipped entirely (their weight stays 0).
    let mut curvature = vec![0.0f64; d];
    for j in 0..d {
        let mut acc = 0.0;
        for i in 0..n {
            let v = bds.features[(i, j)];
            acc += v * v;
        }
        curvature[j] = 0.25 * acc / nf;
    }
    const BIAS_CURVATURE: f64 = 0.25;

    let mut weights = vec![0.0f64; d];
    let mut bias = 0.0f64;
    // Running scores z_i, updated incrementally as coordinates move.
    let mut scores = vec![0.0f64; n];
    let mut last_change = f64::INFINITY;

    for sweep in 0..cfg.max_iterations {
        let mut max_change = 0.0f64;

        for j in 0..d {
            let m_j = curvature[j];
            if m_j <= 0.0 {
                continue;
            }
            let mut grad = 0.0;
            for i in 0..n {
                let p = sigmoid(scores[i]);
                grad += bds.features[(i, j)] * (p - bds.targets[i]);
            }
            grad /= nf;
            let updated = soft_threshold(weights[j] - grad / m_j, lambda / m_j);
            let delta = updated - weights[j];
            if delta != 0.0 {
                weights[j] = updated;
                for i in 0..n {
                    scores[i] += delta * bds.features[(i, j)];
                }
                max_change = max_change.max(delta.abs());
            }
        }

        let mut grad_b = 0.0;
        for i in 0..n {
            grad_b += sigmoid(scores[i]) - bds.targets[i];
        }
        grad_b /= nf;
        let delta_b = -grad_b / BIAS_CURVATURE;
        if delta_b != 0.0 {
            bias += delta_b;
            for s in scores.iter_mut() {
                *s += delta_b;
            }
            max_change = max_change.max(delta_b.abs());
        }

        last_change = max_change;
        if max_change < cfg.tolerance {
            return Ok(FittedBinaryModel {
                weights: Array1::from(weights),
                bias,
                solver_tag: SolverTag::L1,
                hyperparams: Hyperparams {
                    learning_rate: None,
                    iterations: Some(sweep + 1),
                    c: Some(cfg.c),
                    tolerance: Some(cfg.tolerance),
                },
                loss_trace: None,
            });
        }
    }

    Err(SolverError::L1NonConvergence {
        max_iterations: cfg.max_iterations,
        last_change,
    })
}
