//! Full-batch gradient descent with a fixed learning rate.

use ndarray::Array1;

use crate::dataset::BinaryDataset;

use super::{
    gd_gradient, mean_log_loss_eps, sigmoid_clipped, FittedBinaryModel, GdConfig, Hyperparams,
    SolverError, SolverTag,
};

/// Zero-initialized batch gradient descent: `iterations` full-dataset steps
/// `w <- w - lr * grad`. The loss trace holds iteration 0, every
/// `trace_every`-th iteration, and the final iteration — except that a
/// zero-iteration run records nothing at all.
///
/// Features are expected to be standardized; nothing enforces it, but the
/// fixed learning rate is tuned for unit-variance columns.
pub fn train_gd(bds: &BinaryDataset, cfg: &GdConfig) -> Result<FittedBinaryModel, SolverError> {
    if cfg.learning_rate <= 0.0 {
        return Err(SolverError::InvalidConfig(format!(
            "learning_rate must be positive, got {}",
            cfg.learning_rate
        )));
    }
    if cfg.trace_every == 0 {
        return Err(SolverError::InvalidConfig(
            "trace_every must be positive".into(),
        ));
    }
    if cfg.z_clip <= 0.0 || cfg.prob_epsilon <= 0.0 {
        return Err(SolverError::InvalidConfig(
            "z_clip and prob_epsilon must be positive".into(),
        ));
    }

    let d = bds.d();
    let mut weights = Array1::zeros(d);
    let mut bias = 0.0f64;
    let mut trace: Vec<(usize, f64)> = Vec::new();

    let probs_at = |w: &Array1<f64>, b: f64| -> Array1<f64> {
        let mut z = bds.features.dot(w);
        z += b;
        z.mapv(|v| sigmoid_clipped(v, cfg.z_clip))
    };
    let record = |trace: &mut Vec<(usize, f64)>, iter: usize, probs: &Array1<f64>| {
        let loss = mean_log_loss_eps(&bds.targets, probs, cfg.prob_epsilon)?;
        if !loss.is_finite() {
            return Err(SolverError::NonFiniteLoss { iteration: iter });
        }
        trace.push((iter, loss));
        Ok(())
    };

    if cfg.iterations > 0 {
        let p0 = probs_at(&weights, bias);
        record(&mut trace, 0, &p0)?;

        let mut probs = p0;
        for iter in 1..=cfg.iterations {
            let (grad_w, grad_b) = gd_gradient(&bds.features, &bds.targets, &probs)
                .expect("shapes fixed by construction");
            weights.scaled_add(-cfg.learning_rate, &grad_w);
            bias -= cfg.learning_rate * grad_b;
            probs = probs_at(&weights, bias);
            if iter % cfg.trace_every == 0 || iter == cfg.iterations {
                record(&mut trace, iter, &probs)?;
            }
        }
        debug_assert_eq!(trace.last().map(|&(i, _)| i), Some(cfg.iterations));
    }

    Ok(FittedBinaryModel {
        weights,
        bias,
        solver_tag: SolverTag::Gd,
        hyperparams: Hyperparams {
            learning_rate: Some(cfg.learning_rate),
            iterations: Some(cfg.iterations),
            c: None,
            tolerance: None,
        },
        loss_trace: Some(trace),
    })
}
