//! Binary classification metrics: confusion counts, precision/recall/F1 with
//! explicit undefined states, macro averaging, and Wilson score intervals.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("truth has {truth} entries but predictions has {predictions}")]
    LengthMismatch { truth: usize, predictions: usize },
    #[error("no observations")]
    EmptyInput,
    #[error("confidence interval needs at least one trial")]
    ZeroTrials,
    #[error("{successes} successes exceed {trials} trials")]
    TooManySuccesses { successes: usize, trials: usize },
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    BadConfidence(f64),
}

/// 2x2 confusion counts for one binary problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix2 {
    pub true_positives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl ConfusionMatrix2 {
    pub fn total(&self) -> usize {
        self.true_positives + self.true_negatives + self.false_positives + self.false_negatives
    }
}

/// Tallies a confusion matrix from parallel truth/prediction slices.
pub fn confusion(truth: &[bool], predictions: &[bool]) -> Result<ConfusionMatrix2, MetricsError> {
    if truth.len() != predictions.len() {
        return Err(MetricsError::LengthMismatch {
            truth: truth.len(),
            predictions: predictions.len(),
        });
    }
    let mut cm = ConfusionMatrix2::default();
    for (&t, &p) in truth.iter().zip(predictions) {
        match (t, p) {
            (true, true) => cm.true_positives += 1,
            (false, false) => cm.true_negatives += 1,
            (false, true) => cm.false_positives += 1,
            (true, false) => cm.false_negatives += 1,
        }
    }
    Ok(cm)
}

/// Accuracy plus precision/recall/F1. A ratio whose denominator is zero is
/// `None`, never silently coerced to 0: a class with no predicted positives
/// has no meaningful precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsBundle {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn metrics_from_confusion(cm: &ConfusionMatrix2) -> Result<MetricsBundle, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let tp = cm.true_positives as f64;
    let predicted_pos = cm.true_positives + cm.false_positives;
    let actual_pos = cm.true_positives + cm.false_negatives;
    let precision = (predicted_pos > 0).then(|| tp / predicted_pos as f64);
    let recall = (actual_pos > 0).then(|| tp / actual_pos as f64);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Ok(MetricsBundle {
        accuracy: (cm.true_positives + cm.true_negatives) as f64 / total as f64,
        precision,
        recall,
        f1,
    })
}

/// Unweighted means across classes. Undefined per-class values are excluded
/// from their mean and counted instead; a mean over zero defined values is
/// itself `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroAveraged {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub undefined_precision: usize,
    pub undefined_recall: usize,
    pub undefined_f1: usize,
}

pub fn macro_average(per_class: &[MetricsBundle]) -> Result<MacroAveraged, MetricsError> {
    if per_class.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize) {
        let mut sum = 0.0;
        let mut defined = 0usize;
        let mut undefined = 0usize;
        for v in values {
            match v {
                Some(x) => {
                    sum += x;
                    defined += 1;
                }
                None => undefined += 1,
            }
        }
        ((defined > 0).then(|| sum / defined as f64), undefined)
    }
    let accuracy =
        per_class.iter().map(|m| m.accuracy).sum::<f64>() / per_class.len() as f64;
    let (precision, undefined_precision) = mean_defined(per_class.iter().map(|m| m.precision));
    let (recall, undefined_recall) = mean_defined(per_class.iter().map(|m| m.recall));
    let (f1, undefined_f1) = mean_defined(per_class.iter().map(|m| m.f1));
    Ok(MacroAveraged {
        accuracy,
        precision,
        recall,
        f1,
        undefined_precision,
        undefined_recall,
        undefined_f1,
    })
}

/// Wilson score interval for a binomial proportion, clamped to [0, 1].
pub fn wilson_interval(
    successes: usize,
    trials: usize,
    confidence: f64,
) -> Result<(f64, f64), MetricsError> {
    if trials == 0 {
        return Err(MetricsError::ZeroTrials);
    }
    if successes > trials {
        return Err(MetricsError::TooManySuccesses { successes, trials });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(MetricsError::BadConfidence(confidence));
    }
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z = inverse_normal_cdf(1.0 - (1.0 - confidence) / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

/// Standard normal quantile via Acklam's rational approximation
/// (relative error below 1.15e-9 across the open unit interval).
/// Returns NaN outside (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if !(p > 0.0 && p < 1.0) {
        return f64::NAN;
    }
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
