//! Coefficient-magnitude feature importance, sparsity accounting for L1
//! models, rank consistency, and the assay cost/time model.

use thiserror::Error;

use crate::ovr::OvrModel;
use crate::solvers::{retained_features, FittedBinaryModel, SolverTag};

#[derive(Debug, Error)]
pub enum ImportanceError {
    #[error("model has no classes")]
    NoClasses,
    #[error("k must lie in 1..={d}, got {k}")]
    KOutOfRange { k: usize, d: usize },
    #[error("class index {class} out of range for {class_count} classes")]
    ClassOutOfRange { class: usize, class_count: usize },
    #[error("class {class} model was fit by '{got}', need 'l1'")]
    WrongSolverTag { class: usize, got: &'static str },
    #[error("model for class {class} has {got} weights, expected {expected}")]
    WeightCount {
        class: usize,
        got: usize,
        expected: usize,
    },
    #[error("rankings have different lengths: {left} vs {right}")]
    RankingLengthMismatch { left: usize, right: usize },
    #[error("ranking must be a permutation of 0..{d} (length at least 2)")]
    NotAPermutation { d: usize },
    #[error("feature selection is empty")]
    EmptySelection,
    #[error("selected {selected} features but the baseline panel has {baseline}")]
    SelectionTooLarge { selected: usize, baseline: usize },
    #[error("cost model values must be positive")]
    NonPositiveCostModel,
    #[error("time anchors coincide at {0} features; interpolation undefined")]
    DegenerateAnchors(usize),
}

/// Per-class and aggregate coefficient-magnitude importance with
/// deterministic rankings.
#[derive(Debug, Clone)]
pub struct ImportanceReport {
    /// `per_class[k][j]` = |w_kj|.
    pub per_class: Vec<Vec<f64>>,
    /// Sign of each raw coefficient: -1, 0, or +1.
    pub signs: Vec<Vec<i8>>,
    /// `aggregate[j]` = sum over classes of |w_kj|.
    pub aggregate: Vec<f64>,
    /// Feature indices in descending importance per class; ties broken by
    /// ascending feature index.
    pub class_rankings: Vec<Vec<usize>>,
    pub aggregate_ranking: Vec<usize>,
    pub feature_names: Vec<String>,
}

/// Indices 0..d sorted by descending value, ties by ascending index.
fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

pub fn build_importance(model: &OvrModel) -> Result<ImportanceReport, ImportanceError> {
    if model.models.is_empty() {
        return Err(ImportanceError::NoClasses);
    }
    let d = model.d();
    let mut per_class = Vec::with_capacity(model.models.len());
    let mut signs = Vec::with_capacity(model.models.len());
    let mut aggregate = vec![0.0f64; d];
    for (k, fitted) in model.models.iter().enumerate() {
        if fitted.weights.len() != d {
            return Err(ImportanceError::WeightCount {
                class: k,
                got: fitted.weights.len(),
                expected: d,
            });
        }
        let mags: Vec<f64> = fitted.weights.iter().map(|w| w.abs()).collect();
        let class_signs: Vec<i8> = fitted
            .weights
            .iter()
            .map(|&w| {
                if w > 0.0 {
                    1
                } else if w < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect();
        for (j, m) in mags.iter().enumerate() {
            aggregate[j] += m;
        }
        per_class.push(mags);
        signs.push(class_signs);
    }
    let class_rankings = per_class.iter().map(|m| rank_descending(m)).collect();
    let aggregate_ranking = rank_descending(&aggregate);
    Ok(ImportanceReport {
        per_class,
        signs,
        aggregate,
        class_rankings,
        aggregate_ranking,
        feature_names: model.feature_names.clone(),
    })
}

/// Which ranking of an [`ImportanceReport`] to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Class(usize),
    Aggregate,
}

/// The top `k` features of the selected ranking as (name, importance, sign).
/// For a class the sign is that class's coefficient sign; for the aggregate
/// it is the consensus across classes — the shared sign when every nonzero
/// coefficient agrees, else 0.
pub fn top_k(
    report: &ImportanceReport,
    selector: Selector,
    k: usize,
) -> Result<Vec<(String, f64, i8)>, ImportanceError> {
    let d = report.feature_names.len();
    if k == 0 || k > d {
        return Err(ImportanceError::KOutOfRange { k, d });
    }
    let (ranking, values): (&[usize], &[f64]) = match selector {
        Selector::Class(c) => {
            if c >= report.per_class.len() {
                return Err(ImportanceError::ClassOutOfRange {
                    class: c,
                    class_count: report.per_class.len(),
                });
            }
            (&report.class_rankings[c], &report.per_class[c])
        }
        Selector::Aggregate => (&report.aggregate_ranking, &report.aggregate),
    };
    let sign_of = |j: usize| -> i8 {
        match selector {
            Selector::Class(c) => report.signs[c][j],
            Selector::Aggregate => {
                let mut consensus = 0i8;
                for class_signs in &report.signs {
                    let s = class_signs[j];
                    if s == 0 {
                        continue;
                    }
                    if consensus == 0 {
                        consensus = s;
                    } else if consensus != s {
                        return 0;
                    }
                }
                consensus
            }
        }
    };
    Ok(ranking[..k]
        .iter()
        .map(|&j| (report.feature_names[j].clone(), values[j], sign_of(j)))
        .collect())
}

/// How much of one L1 model survived thresholding.
#[derive(Debug, Clone)]
pub struct SparsityEntry {
    pub class: usize,
    pub retained_count: usize,
    pub zeroed_count: usize,
    pub retention_fraction: f64,
    pub retained_names: Vec<String>,
    /// Largest-magnitude surviving feature, if any survived.
    pub top_retained: Option<(String, f64)>,
}

/// Per-class retention accounting for L1-fit models.
pub fn sparsity_report(
    models: &[FittedBinaryModel],
    feature_names: &[String],
    threshold: f64,
) -> Result<Vec<SparsityEntry>, ImportanceError> {
    let d = feature_names.len();
    let mut entries = Vec::with_capacity(models.len());
    for (k, model) in models.iter().enumerate() {
        if model.solver_tag != SolverTag::L1 {
            return Err(ImportanceError::WrongSolverTag {
                class: k,
                got: model.solver_tag.as_str(),
            });
        }
        if model.weights.len() != d {
            return Err(ImportanceError::WeightCount {
                class: k,
                got: model.weights.len(),
                expected: d,
            });
        }
        let retained = retained_features(model, threshold);
        let top_retained = retained
            .iter()
            .copied()
            .max_by(|&a, &b| {
                model.weights[a]
                    .abs()
                    .partial_cmp(&model.weights[b].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // On equal magnitude prefer the lower index, mirroring the
                    // ranking tie-break.
                    .then(b.cmp(&a))
            })
            .map(|j| (feature_names[j].clone(), model.weights[j].abs()));
        entries.push(SparsityEntry {
            class: k,
            retained_count: retained.len(),
            zeroed_count: d - retained.len(),
            retention_fraction: retained.len() as f64 / d as f64,
            retained_names: retained.iter().map(|&j| feature_names[j].clone()).collect(),
            top_retained,
        });
    }
    Ok(entries)
}

/// Spearman rank correlation between two rankings (both strict permutations
/// of 0..d): 1 − 6 Σ d_j² / (d (d² − 1)), where d_j is the difference in the
/// rank each permutation assigns feature j.
pub fn spearman_rho(ranking_a: &[usize], ranking_b: &[usize]) -> Result<f64, ImportanceError> {
    if ranking_a.len() != ranking_b.len() {
        return Err(ImportanceError::RankingLengthMismatch {
            left: ranking_a.len(),
            right: ranking_b.len(),
        });
    }
    let d = ranking_a.len();
    if d < 2 {
        return Err(ImportanceError::NotAPermutation { d });
    }
    let rank_vector = |ranking: &[usize]| -> Result<Vec<usize>, ImportanceError> {
        let mut ranks = vec![usize::MAX; d];
        for (pos, &feature) in ranking.iter().enumerate() {
            if feature >= d || ranks[feature] != usize::MAX {
                return Err(ImportanceError::NotAPermutation { d });
            }
            ranks[feature] = pos;
        }
        Ok(ranks)
    };
    let ra = rank_vector(ranking_a)?;
    let rb = rank_vector(ranking_b)?;
    let sum_sq: f64 = ra
        .iter()
        .zip(&rb)
        .map(|(&a, &b)| {
            let diff = a as f64 - b as f64;
            diff * diff
        })
        .sum();
    let df = d as f64;
    Ok(1.0 - 6.0 * sum_sq / (df * (df * df - 1.0)))
}

/// Per-feature assay economics: cost per measured feature, total panel time,
/// and one extra (panel size → minutes) anchor pinning the time line.
#[derive(Debug, Clone)]
pub struct CostModel {
    pub cost_per_assay: f64,
    pub minutes_full_panel: f64,
    pub anchor_count: usize,
    pub anchor_minutes: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            cost_per_assay: 10.0,
            minutes_full_panel: 45.0,
            anchor_count: 5,
            anchor_minutes: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBenefit {
    pub selected_count: usize,
    pub cost_per_sample: f64,
    pub saving_per_sample: f64,
    /// 1 − selected/baseline.
    pub complexity_reduction: f64,
    /// Minutes per sample, interpolated linearly between the full panel and
    /// the anchor point.
    pub minutes_estimate: f64,
}

pub fn cost_benefit(
    selected: &[usize],
    cm: &CostModel,
    baseline_d: usize,
) -> Result<CostBenefit, ImportanceError> {
    if selected.is_empty() {
        return Err(ImportanceError::EmptySelection);
    }
    let mut unique = selected.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let s = unique.len();
    if s > baseline_d || unique.last().is_some_and(|&j| j >= baseline_d) {
        return Err(ImportanceError::SelectionTooLarge {
            selected: s,
            baseline: baseline_d,
        });
    }
    if cm.cost_per_assay <= 0.0 || cm.minutes_full_panel <= 0.0 || cm.anchor_minutes <= 0.0 {
        return Err(ImportanceError::NonPositiveCostModel);
    }
    if cm.anchor_count == baseline_d {
        return Err(ImportanceError::DegenerateAnchors(baseline_d));
    }
    let slope = (cm.anchor_minutes - cm.minutes_full_panel)
        / (cm.anchor_count as f64 - baseline_d as f64);
    Ok(CostBenefit {
        selected_count: s,
        cost_per_sample: s as f64 * cm.cost_per_assay,
        saving_per_sample: (baseline_d - s) as f64 * cm.cost_per_assay,
        complexity_reduction: 1.0 - s as f64 / baseline_d as f64,
        minutes_estimate: cm.minutes_full_panel + (s as f64 - baseline_d as f64) * slope,
    })
}
