//! Binary logistic-regression trainers sharing one probability model:
//! fixed-rate batch gradient descent, a damped-Newton reference solver, and
//! L1-penalized cyclic coordinate descent.

mod coordinate;
mod gd;
mod newton;

pub use coordinate::train_l1;
pub use gd::train_gd;
pub use newton::train_reference;

use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
    #[error("length mismatch: {left} targets vs {right} probabilities")]
    LengthMismatch { left: usize, right: usize },
    #[error("shape mismatch: features are {n}x{d}, got {targets} targets and {probs} probabilities")]
    ShapeMismatch {
        n: usize,
        d: usize,
        targets: usize,
        probs: usize,
    },
    #[error("singular Newton system at iteration {iteration}")]
    SingularSystem { iteration: usize },
    #[error(
        "reference solver did not converge within {max_iterations} iterations \
         (gradient norm {gradient_norm:.3e}); last iterate retained in this error"
    )]
    ReferenceNonConvergence {
        max_iterations: usize,
        gradient_norm: f64,
        last_weights: Vec<f64>,
        last_bias: f64,
    },
    #[error(
        "coordinate descent did not converge within {max_iterations} cycles \
         (last max coordinate change {last_change:.3e})"
    )]
    L1NonConvergence {
        max_iterations: usize,
        last_change: f64,
    },
}

/// Which trainer produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverTag {
    Gd,
    Reference,
    L1,
}

impl SolverTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverTag::Gd => "gd",
            SolverTag::Reference => "reference",
            SolverTag::L1 => "l1",
        }
    }
}

/// The hyperparameters a trainer actually used; fields are `None` when a
/// given solver has no such knob.
#[derive(Debug, Clone, Default)]
pub struct Hyperparams {
    pub learning_rate: Option<f64>,
    pub iterations: Option<usize>,
    pub c: Option<f64>,
    pub tolerance: Option<f64>,
}

/// A trained binary classifier: score = w·x + b on standardized features.
#[derive(Debug, Clone)]
pub struct FittedBinaryModel {
    pub weights: Array1<f64>,
    pub bias: f64,
    pub solver_tag: SolverTag,
    pub hyperparams: Hyperparams,
    /// `(iteration, mean loss)` samples, strictly increasing in iteration.
    pub loss_trace: Option<Vec<(usize, f64)>>,
}

impl FittedBinaryModel {
    /// Decision scores w·X + b for a standardized feature matrix.
    pub fn scores(&self, features: &Array2<f64>) -> Array1<f64> {
        features.dot(&self.weights) + self.bias
    }

    /// Per-row probabilities on standardized features.
    pub fn probabilities(&self, features: &Array2<f64>) -> Array1<f64> {
        self.scores(features).mapv(sigmoid)
    }

    /// Probability for one standardized feature vector.
    pub fn probability(&self, x: &Array1<f64>) -> f64 {
        sigmoid(self.weights.dot(x) + self.bias)
    }
}

/// Gradient-descent knobs.
#[derive(Debug, Clone)]
pub struct GdConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    /// Record the loss every this many iterations (plus iteration 0 and the
    /// final iteration).
    pub trace_every: usize,
    /// Pre-activation scores are clamped to `[-z_clip, z_clip]`.
    pub z_clip: f64,
    /// Probabilities are clamped to `[eps, 1-eps]` before logarithms.
    pub prob_epsilon: f64,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            learning_rate: 0.0001,
            iterations: 10_000,
            trace_every: 100,
            z_clip: 500.0,
            prob_epsilon: 1e-15,
        }
    }
}

/// Coordinate-descent knobs. `c` is the inverse regularization strength;
/// the per-sample penalty weight is `lambda = 1 / (c * n)`.
#[derive(Debug, Clone)]
pub struct L1Config {
    pub c: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the largest coordinate change in a cycle.
    pub tolerance: f64,
}

impl Default for L1Config {
    fn default() -> Self {
        L1Config {
            c: 0.1,
            max_iterations: 100_000,
            tolerance: 1e-8,
        }
    }
}

/// Coefficients with `|w| > threshold` count as retained by the L1 solver.
pub const DEFAULT_RETENTION_THRESHOLD: f64 = 1e-10;

const Z_CLIP: f64 = 500.0;
// Largest f64 strictly below 1.0; sigmoid saturates here instead of at 1.0
// so the open-interval (0,1) contract holds and log(1-p) stays finite.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

/// Logistic function with the input clamped to `[-500, 500]` and the output
/// kept strictly inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    sigmoid_clipped(z, Z_CLIP)
}

pub(crate) fn sigmoid_clipped(z: f64, z_clip: f64) -> f64 {
    let z = z.clamp(-z_clip, z_clip);
    // Evaluate via exp of a non-positive argument only, so nothing overflows.
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.min(ONE_BELOW)
}

/// Mean binary cross-entropy with probabilities clamped to
/// `[epsilon, 1-epsilon]` before the logarithms.
pub fn mean_log_loss(targets: &Array1<f64>, probs: &Array1<f64>) -> Result<f64, SolverError> {
    mean_log_loss_eps(targets, probs, 1e-15)
}

pub(crate) fn mean_log_loss_eps(
    targets: &Array1<f64>,
    probs: &Array1<f64>,
    epsilon: f64,
) -> Result<f64, SolverError> {
    if targets.len() != probs.len() {
        return Err(SolverError::LengthMismatch {
            left: targets.len(),
            right: probs.len(),
        });
    }
    let n = targets.len() as f64;
    let mut total = 0.0;
    for (&t, &p) in targets.iter().zip(probs.iter()) {
        let p = p.clamp(epsilon, 1.0 - epsilon);
        total += t * p.ln() + (1.0 - t) * (1.0 - p).ln();
    }
    Ok(-total / n)
}

/// Analytic gradient of the mean log loss at the given probabilities:
/// `grad_w = X^T (p - y) / n`, `grad_b = mean(p - y)`.
pub fn gd_gradient(
    features: &Array2<f64>,
    targets: &Array1<f64>,
    probs: &Array1<f64>,
) -> Result<(Array1<f64>, f64), SolverError> {
    let n = features.nrows();
    if targets.len() != n || probs.len() != n {
        return Err(SolverError::ShapeMismatch {
            n,
            d: features.ncols(),
            targets: targets.len(),
            probs: probs.len(),
        });
    }
    let residual = probs - targets;
    let grad_w = features.t().dot(&residual) / n as f64;
    let grad_b = residual.sum() / n as f64;
    Ok((grad_w, grad_b))
}

/// Proximal operator of the L1 penalty: `sign(x) * max(|x| - t, 0)`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Indices of coefficients whose magnitude exceeds `threshold`, ascending.
pub fn retained_features(m: &FittedBinaryModel, threshold: f64) -> Vec<usize> {
    m.weights
        .iter()
        .enumerate()
        .filter(|&(_, w)| w.abs() > threshold)
        .map(|(j, _)| j)
        .collect()
}
