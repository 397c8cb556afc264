//! End-to-end run: load → split → standardize → train each selected solver →
//! metrics → importance → sparsity → consistency → cost-benefit, emitting the
//! full artifact tree atomically.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{Array2, Axis};

use crate::dataset::{load_csv, stratified_split, LabeledDataset, SplitPair};
use crate::importance::{
    build_importance, cost_benefit, sparsity_report, spearman_rho, top_k, CostBenefit, CostModel,
    ImportanceReport, Selector, SparsityEntry,
};
use crate::metrics::{
    confusion, macro_average, metrics_from_confusion, wilson_interval, ConfusionMatrix2,
    MetricsBundle,
};
use crate::ovr::{argmax_rows, train_ovr, OvrModel, SolverSpec};
use crate::preprocess::{fit_standardizer, transform};
use crate::solvers::{GdConfig, L1Config, SolverTag, DEFAULT_RETENTION_THRESHOLD};

/// Any stage failure, tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    fn new(
        stage: &'static str,
        source: impl Into<Box<dyn std::error::Error + Send + Sync>>,
    ) -> Self {
        PipelineError {
            stage,
            source: source.into(),
        }
    }
}

/// Which of the three trainers a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverSelection {
    pub gd: bool,
    pub reference: bool,
    pub l1: bool,
}

impl Default for SolverSelection {
    fn default() -> Self {
        SolverSelection {
            gd: true,
            reference: true,
            l1: true,
        }
    }
}

impl SolverSelection {
    /// Parses a comma-separated subset of `gd,reference,l1`.
    pub fn parse(list: &str) -> Result<Self, String> {
        let mut sel = SolverSelection {
            gd: false,
            reference: false,
            l1: false,
        };
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "gd" => sel.gd = true,
                "reference" => sel.reference = true,
                "l1" => sel.l1 = true,
                other => {
                    return Err(format!(
                        "unknown solver '{other}' (expected gd, reference, or l1)"
                    ))
                }
            }
        }
        Ok(sel)
    }

    pub fn is_empty(&self) -> bool {
        !(self.gd || self.reference || self.l1)
    }

    /// Selected solvers in canonical run order.
    pub fn tags(&self) -> Vec<SolverTag> {
        let mut tags = Vec::new();
        if self.gd {
            tags.push(SolverTag::Gd);
        }
        if self.reference {
            tags.push(SolverTag::Reference);
        }
        if self.l1 {
            tags.push(SolverTag::L1);
        }
        tags
    }
}

/// Everything one run needs. `output_dir` may stay `None` for a C sweep that
/// only prints its table.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data_path: PathBuf,
    pub label_column: String,
    pub seed: u64,
    pub test_fraction: f64,
    pub gd: GdConfig,
    pub l1: L1Config,
    pub reference_tolerance: f64,
    pub reference_max_iterations: usize,
    pub solvers: SolverSelection,
    pub output_dir: Option<PathBuf>,
    pub c_grid: Vec<f64>,
    pub consistency_seeds: Vec<u64>,
}

impl RunConfig {
    pub fn new(data_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            data_path: data_path.into(),
            label_column: "target".to_owned(),
            seed: 15,
            test_fraction: 0.2,
            gd: GdConfig::default(),
            l1: L1Config::default(),
            reference_tolerance: 1e-4,
            reference_max_iterations: 100,
            solvers: SolverSelection::default(),
            output_dir: None,
            c_grid: vec![0.01, 0.05, 0.1, 0.5, 1.0],
            consistency_seeds: vec![1, 2, 3, 15],
        }
    }
}

/// Headline numbers for one trained solver.
#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub tag: SolverTag,
    /// Mean over classes of binary (one-vs-rest) accuracy on the training
    /// split; each binary task thresholds its probability at 1/2.
    pub mean_train_accuracy: f64,
    pub mean_test_accuracy: f64,
    pub per_class_train_accuracy: Vec<f64>,
    pub per_class_test_accuracy: Vec<f64>,
    /// Fraction of test rows whose argmax class is the true class.
    pub multiclass_test_accuracy: f64,
    pub multiclass_test_correct: usize,
    pub per_class_confusion: Vec<ConfusionMatrix2>,
    pub per_class_metrics: Vec<MetricsBundle>,
    /// Final traced loss per class (gradient descent only).
    pub final_losses: Option<Vec<f64>>,
}

/// What `run_pipeline` hands back besides the files on disk.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcomes: Vec<SolverOutcome>,
    pub train_size: usize,
    pub test_size: usize,
    /// 95% Wilson interval on the reference solver's multiclass test accuracy.
    pub reference_wilson: Option<(f64, f64)>,
    pub sparsity: Option<Vec<SparsityEntry>>,
    /// Aggregate-importance rankings per consistency seed, plus the smallest
    /// pairwise Spearman rho among them.
    pub consistency_min_rho: Option<f64>,
    pub cost: Option<CostBenefit>,
    pub subset_mean_test_accuracy: Option<f64>,
    pub subset_multiclass_test_accuracy: Option<f64>,
    pub files_written: usize,
}

impl RunSummary {
    pub fn outcome(&self, tag: SolverTag) -> Option<&SolverOutcome> {
        self.outcomes.iter().find(|o| o.tag == tag)
    }
}

/// Fixed-point formatting used by every emitted CSV cell: six decimals,
/// negative zero normalized away.
fn fmt6(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.6}")
}

fn fmt_opt6(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt6(x),
        None => "undefined".to_owned(),
    }
}

/// Files staged in memory so nothing touches disk until every stage has
/// succeeded.
struct Staging {
    files: Vec<(String, String)>,
}

impl Staging {
    fn new() -> Self {
        Staging { files: Vec::new() }
    }

    fn add(&mut self, relative_path: impl Into<String>, content: String) {
        self.files.push((relative_path.into(), content));
    }

    /// Writes all staged files under `root`; on any failure removes whatever
    /// this call managed to create before reporting the error.
    fn flush(self, root: &Path) -> Result<usize, PipelineError> {
        let mut written: Vec<PathBuf> = Vec::new();
        let result = (|| -> std::io::Result<()> {
            for (rel, content) in &self.files {
                let path = root.join(rel);
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                std::fs::write(&path, content)?;
                written.push(path);
            }
            Ok(())
        })();
        match result {
            Ok(()) => Ok(written.len()),
            Err(e) => {
                for path in written {
                    let _ = std::fs::remove_file(path);
                }
                Err(PipelineError::new("write", e))
            }
        }
    }
}

fn model_csv(model: &crate::solvers::FittedBinaryModel, names: &[String]) -> String {
    let mut out = String::from("feature_name,weight\n");
    for (name, w) in names.iter().zip(model.weights.iter()) {
        let _ = writeln!(out, "{name},{}", fmt6(*w));
    }
    let _ = writeln!(out, "bias,{}", fmt6(model.bias));
    out
}

fn predictions_csv(
    original_indices: &[usize],
    labels: &[usize],
    probs: &Array2<f64>,
    predicted: &[usize],
) -> String {
    let k = probs.ncols();
    let mut out = String::from("row_index,true_class,predicted_class");
    for c in 0..k {
        let _ = write!(out, ",prob_{c}");
    }
    out.push('\n');
    for i in 0..probs.nrows() {
        let _ = write!(
            out,
            "{},{},{}",
            original_indices[i], labels[i], predicted[i]
        );
        for c in 0..k {
            let _ = write!(out, ",{}", fmt6(probs[(i, c)]));
        }
        out.push('\n');
    }
    out
}

fn confusion_csv(cm: &ConfusionMatrix2) -> String {
    format!(
        "true_positives,false_positives,false_negatives,true_negatives\n{},{},{},{}\n",
        cm.true_positives, cm.false_positives, cm.false_negatives, cm.true_negatives
    )
}

fn index_lines(indices: &[usize]) -> String {
    let mut out = String::new();
    for i in indices {
        let _ = writeln!(out, "{i}");
    }
    out
}

/// Per-class binary accuracies from thresholded per-class probabilities.
fn binary_accuracies(probs_by_class: &[Vec<f64>], labels: &[usize]) -> Vec<f64> {
    probs_by_class
        .iter()
        .enumerate()
        .map(|(k, probs)| {
            let correct = probs
                .iter()
                .zip(labels)
                .filter(|&(&p, &y)| (p >= 0.5) == (y == k))
                .count();
            correct as f64 / labels.len() as f64
        })
        .collect()
}

fn spec_for(tag: SolverTag, cfg: &RunConfig) -> SolverSpec {
    match tag {
        SolverTag::Gd => SolverSpec::Gd(cfg.gd.clone()),
        SolverTag::Reference => SolverSpec::Reference {
            tolerance: cfg.reference_tolerance,
            max_iterations: cfg.reference_max_iterations,
        },
        SolverTag::L1 => SolverSpec::L1(cfg.l1.clone()),
    }
}

/// Splits, standardizes on the training side only, and trains one OvR model.
fn train_on_split(
    split: &SplitPair,
    spec: &SolverSpec,
) -> Result<OvrModel, Box<dyn std::error::Error + Send + Sync>> {
    let standardizer = fit_standardizer(&split.train)?;
    let train_std = transform(&standardizer, &split.train)?;
    Ok(train_ovr(&train_std, standardizer, spec)?)
}

fn select_columns(ds: &LabeledDataset, columns: &[usize]) -> LabeledDataset {
    LabeledDataset {
        features: ds.features.select(Axis(1), columns),
        labels: ds.labels.clone(),
        feature_names: columns
            .iter()
            .map(|&j| ds.feature_names[j].clone())
            .collect(),
        class_count: ds.class_count,
    }
}

struct EvaluatedSolver {
    outcome: SolverOutcome,
    model: OvrModel,
    test_probs: Array2<f64>,
}

fn evaluate_solver(
    tag: SolverTag,
    model: OvrModel,
    split: &SplitPair,
    train_std: &LabeledDataset,
) -> Result<EvaluatedSolver, PipelineError> {
    let k = model.class_count;
    let test_probs = model
        .predict_proba(&split.test.features)
        .map_err(|e| PipelineError::new("predict", e))?;

    let train_probs_by_class: Vec<Vec<f64>> = model
        .models
        .iter()
        .map(|m| m.probabilities(&train_std.features).to_vec())
        .collect();
    let test_probs_by_class: Vec<Vec<f64>> = (0..k)
        .map(|c| test_probs.column(c).to_vec())
        .collect();

    let per_class_train_accuracy = binary_accuracies(&train_probs_by_class, &train_std.labels);
    let per_class_test_accuracy = binary_accuracies(&test_probs_by_class, &split.test.labels);

    let mut per_class_confusion = Vec::with_capacity(k);
    let mut per_class_metrics = Vec::with_capacity(k);
    for c in 0..k {
        let truth: Vec<bool> = split.test.labels.iter().map(|&y| y == c).collect();
        let pred: Vec<bool> = test_probs_by_class[c].iter().map(|&p| p >= 0.5).collect();
        let cm = confusion(&truth, &pred).map_err(|e| PipelineError::new("metrics", e))?;
        per_class_metrics
            .push(metrics_from_confusion(&cm).map_err(|e| PipelineError::new("metrics", e))?);
        per_class_confusion.push(cm);
    }

    let predicted = argmax_rows(&test_probs);
    let multiclass_test_correct = predicted
        .iter()
        .zip(&split.test.labels)
        .filter(|&(p, y)| p == y)
        .count();

    let final_losses = if tag == SolverTag::Gd {
        Some(
            model
                .models
                .iter()
                .map(|m| {
                    m.loss_trace
                        .as_ref()
                        .and_then(|t| t.last().map(|&(_, loss)| loss))
                        .unwrap_or(f64::NAN)
                })
                .collect(),
        )
    } else {
        None
    };

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let outcome = SolverOutcome {
        tag,
        mean_train_accuracy: mean(&per_class_train_accuracy),
        mean_test_accuracy: mean(&per_class_test_accuracy),
        per_class_train_accuracy,
        per_class_test_accuracy,
        multiclass_test_accuracy: multiclass_test_correct as f64 / split.test.n() as f64,
        multiclass_test_correct,
        per_class_confusion,
        per_class_metrics,
        final_losses,
    };
    Ok(EvaluatedSolver {
        outcome,
        model,
        test_probs,
    })
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary, PipelineError> {
    if cfg.solvers.is_empty() {
        return Err(PipelineError::new("config", "no solver selected"));
    }
    let out_dir = cfg
        .output_dir
        .as_ref()
        .ok_or_else(|| PipelineError::new("config", "no output directory set"))?
        .clone();

    let mut timings: Vec<(&'static str, f64)> = Vec::new();
    let mut timed = |name: &'static str, t0: Instant| {
        timings.push((name, t0.elapsed().as_secs_f64() * 1e3));
    };

    let t0 = Instant::now();
    let ds = load_csv(&cfg.data_path, &cfg.label_column)
        .map_err(|e| PipelineError::new("load", e))?;
    timed("load", t0);

    let t0 = Instant::now();
    let split = stratified_split(&ds, cfg.test_fraction, cfg.seed)
        .map_err(|e| PipelineError::new("split", e))?;
    timed("split", t0);

    let t0 = Instant::now();
    let standardizer =
        fit_standardizer(&split.train).map_err(|e| PipelineError::new("standardize", e))?;
    let train_std =
        transform(&standardizer, &split.train).map_err(|e| PipelineError::new("standardize", e))?;
    timed("standardize", t0);

    let mut staging = Staging::new();
    staging.add("part_1/train_indices.csv", index_lines(&split.train_indices));
    staging.add("part_1/test_indices.csv", index_lines(&split.test_indices));
    let mut scaler = String::from("feature_name,mean,std\n");
    for (j, name) in ds.feature_names.iter().enumerate() {
        let _ = writeln!(
            scaler,
            "{name},{},{}",
            fmt6(standardizer.means[j]),
            fmt6(standardizer.stds[j])
        );
    }
    staging.add("part_1/scaler_params.csv", scaler);

    let mut evaluated: Vec<EvaluatedSolver> = Vec::new();
    for tag in cfg.solvers.tags() {
        let t0 = Instant::now();
        let spec = spec_for(tag, cfg);
        let model = train_ovr(&train_std, standardizer.clone(), &spec)
            .map_err(|e| PipelineError::new("train", e))?;
        let ev = evaluate_solver(tag, model, &split, &train_std)?;
        timed(
            match tag {
                SolverTag::Gd => "train+eval gd",
                SolverTag::Reference => "train+eval reference",
                SolverTag::L1 => "train+eval l1",
            },
            t0,
        );
        evaluated.push(ev);
    }

    // Per-solver artifacts: models and predictions go to the solver's part,
    // confusion matrices and the metrics table to part_3.
    let t0 = Instant::now();
    let mut metrics_table = String::from("solver,class,accuracy,precision,recall,f1\n");
    for ev in &evaluated {
        let tag = ev.outcome.tag;
        let part = match tag {
            SolverTag::Gd => "part_2",
            SolverTag::Reference => "part_3",
            SolverTag::L1 => "part_4",
        };
        for (k, m) in ev.model.models.iter().enumerate() {
            staging.add(
                format!("{part}/model_{}_class{k}.csv", tag.as_str()),
                model_csv(m, &ev.model.feature_names),
            );
            if tag == SolverTag::Gd {
                if let Some(trace) = &m.loss_trace {
                    let mut t = String::from("iteration,loss\n");
                    for &(iter, loss) in trace {
                        let _ = writeln!(t, "{iter},{}", fmt6(loss));
                    }
                    staging.add(format!("part_2/loss_trace_class{k}.csv"), t);
                }
            }
        }
        let predicted = argmax_rows(&ev.test_probs);
        staging.add(
            format!("{part}/predictions_{}.csv", tag.as_str()),
            predictions_csv(
                &split.test_indices,
                &split.test.labels,
                &ev.test_probs,
                &predicted,
            ),
        );
        for (k, cm) in ev.outcome.per_class_confusion.iter().enumerate() {
            staging.add(
                format!("part_3/confusion_{}_class{k}.csv", tag.as_str()),
                confusion_csv(cm),
            );
        }
        for (k, m) in ev.outcome.per_class_metrics.iter().enumerate() {
            let _ = writeln!(
                metrics_table,
                "{},{k},{},{},{},{}",
                tag.as_str(),
                fmt6(m.accuracy),
                fmt_opt6(m.precision),
                fmt_opt6(m.recall),
                fmt_opt6(m.f1)
            );
        }
        let macro_m = macro_average(&ev.outcome.per_class_metrics)
            .map_err(|e| PipelineError::new("metrics", e))?;
        let _ = writeln!(
            metrics_table,
            "{},macro,{},{},{},{}",
            tag.as_str(),
            fmt6(macro_m.accuracy),
            fmt_opt6(macro_m.precision),
            fmt_opt6(macro_m.recall),
            fmt_opt6(macro_m.f1)
        );
    }
    staging.add("part_3/metrics_summary.csv", metrics_table);
    timed("metrics", t0);

    let mut skipped: Vec<String> = Vec::new();

    // Importance, consistency, and the cost model all read the reference
    // model; sparsity reads the L1 models.
    let reference_ev = evaluated
        .iter()
        .find(|ev| ev.outcome.tag == SolverTag::Reference);
    let l1_ev = evaluated.iter().find(|ev| ev.outcome.tag == SolverTag::L1);

    let t0 = Instant::now();
    let importance: Option<ImportanceReport> = match reference_ev {
        Some(ev) => Some(
            build_importance(&ev.model).map_err(|e| PipelineError::new("importance", e))?,
        ),
        None => {
            skipped.push(
                "part_5 importance/consistency/cost files (reference solver not selected)"
                    .to_owned(),
            );
            None
        }
    };
    if let Some(report) = &importance {
        let mut per_class = String::from("class,rank,feature_name,importance,sign\n");
        for (k, ranking) in report.class_rankings.iter().enumerate() {
            for (rank, &j) in ranking.iter().enumerate() {
                let _ = writeln!(
                    per_class,
                    "{k},{},{},{},{}",
                    rank + 1,
                    report.feature_names[j],
                    fmt6(report.per_class[k][j]),
                    report.signs[k][j]
                );
            }
        }
        staging.add("part_5/importance_per_class.csv", per_class);

        let rows = top_k(report, Selector::Aggregate, report.feature_names.len())
            .map_err(|e| PipelineError::new("importance", e))?;
        let mut agg = String::from("rank,feature_name,importance,sign\n");
        for (rank, (name, value, sign)) in rows.iter().enumerate() {
            let _ = writeln!(agg, "{},{name},{},{sign}", rank + 1, fmt6(*value));
        }
        staging.add("part_5/importance_aggregate.csv", agg);
    }
    timed("importance", t0);

    let t0 = Instant::now();
    let sparsity = match l1_ev {
        Some(ev) => {
            let entries = sparsity_report(
                &ev.model.models,
                &ev.model.feature_names,
                DEFAULT_RETENTION_THRESHOLD,
            )
            .map_err(|e| PipelineError::new("sparsity", e))?;
            let mut table = String::from(
                "class,retained_count,zeroed_count,retention_fraction,top_feature,top_weight,retained_features\n",
            );
            for e in &entries {
                let (top_name, top_w) = match &e.top_retained {
                    Some((name, w)) => (name.clone(), fmt6(*w)),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(
                    table,
                    "{},{},{},{},{top_name},{top_w},{}",
                    e.class,
                    e.retained_count,
                    e.zeroed_count,
                    fmt6(e.retention_fraction),
                    e.retained_names.join(";")
                );
            }
            staging.add("part_4/sparsity_report.csv", table);
            Some(entries)
        }
        None => {
            skipped.push("part_4 files (l1 solver not selected)".to_owned());
            None
        }
    };
    timed("sparsity", t0);

    // Rank consistency: retrain the reference solver on each listed seed's
    // split and compare aggregate rankings pairwise.
    let t0 = Instant::now();
    let mut consistency_min_rho = None;
    if importance.is_some() && cfg.consistency_seeds.len() >= 2 {
        let spec = spec_for(SolverTag::Reference, cfg);
        let mut rankings: Vec<(u64, Vec<usize>)> = Vec::new();
        for &seed in &cfg.consistency_seeds {
            let seed_split = stratified_split(&ds, cfg.test_fraction, seed)
                .map_err(|e| PipelineError::new("consistency", e))?;
            let model = train_on_split(&seed_split, &spec).map_err(|e| {
                PipelineError::new("consistency", format!("seed {seed}: {e}"))
            })?;
            let report =
                build_importance(&model).map_err(|e| PipelineError::new("consistency", e))?;
            rankings.push((seed, report.aggregate_ranking));
        }
        let m = rankings.len();
        let mut matrix = String::from("seed");
        for (seed, _) in &rankings {
            let _ = write!(matrix, ",{seed}");
        }
        matrix.push('\n');
        let mut min_rho = f64::INFINITY;
        for a in 0..m {
            let _ = write!(matrix, "{}", rankings[a].0);
            for b in 0..m {
                let rho = spearman_rho(&rankings[a].1, &rankings[b].1)
                    .map_err(|e| PipelineError::new("consistency", e))?;
                if a != b {
                    min_rho = min_rho.min(rho);
                }
                let _ = write!(matrix, ",{}", fmt6(rho));
            }
            matrix.push('\n');
        }
        staging.add("part_5/consistency_matrix.csv", matrix);
        consistency_min_rho = Some(min_rho);
    } else if importance.is_some() {
        skipped.push("consistency matrix (fewer than two consistency seeds)".to_owned());
    }
    timed("consistency", t0);

    // Cost model for the aggregate top-5 panel, with the reference solver
    // retrained on just that panel to measure (not estimate) its accuracy.
    let t0 = Instant::now();
    let mut cost = None;
    let mut subset_mean_test_accuracy = None;
    let mut subset_multiclass_test_accuracy = None;
    if let Some(report) = &importance {
        let d = report.feature_names.len();
        let panel = d.min(5);
        let mut selected: Vec<usize> = report.aggregate_ranking[..panel].to_vec();
        selected.sort_unstable();
        let cb = cost_benefit(&selected, &CostModel::default(), d)
            .map_err(|e| PipelineError::new("cost-benefit", e))?;

        let sub_split = SplitPair {
            train: select_columns(&split.train, &selected),
            test: select_columns(&split.test, &selected),
            train_indices: split.train_indices.clone(),
            test_indices: split.test_indices.clone(),
            seed: split.seed,
            test_fraction: split.test_fraction,
        };
        let spec = spec_for(SolverTag::Reference, cfg);
        let sub_model = train_on_split(&sub_split, &spec)
            .map_err(|e| PipelineError::new("cost-benefit", e))?;
        let sub_train_std = transform(&sub_model.standardizer, &sub_split.train)
            .map_err(|e| PipelineError::new("cost-benefit", e))?;
        let sub_ev = evaluate_solver(SolverTag::Reference, sub_model, &sub_split, &sub_train_std)?;
        subset_mean_test_accuracy = Some(sub_ev.outcome.mean_test_accuracy);
        subset_multiclass_test_accuracy = Some(sub_ev.outcome.multiclass_test_accuracy);

        let mut txt = String::from("assay panel selected by aggregate importance\n\n");
        let _ = writeln!(txt, "panel size: {} of {d} features", cb.selected_count);
        let _ = writeln!(txt, "features (by aggregate importance):");
        for &j in &report.aggregate_ranking[..panel] {
            let _ = writeln!(
                txt,
                "  {} ({})",
                report.feature_names[j],
                fmt6(report.aggregate[j])
            );
        }
        let _ = writeln!(txt);
        let _ = writeln!(txt, "cost per sample: ${}", fmt6(cb.cost_per_sample));
        let _ = writeln!(txt, "saving per sample: ${}", fmt6(cb.saving_per_sample));
        let _ = writeln!(
            txt,
            "complexity reduction: {}%",
            fmt6(cb.complexity_reduction * 100.0)
        );
        let _ = writeln!(
            txt,
            "estimated time per sample: {} minutes (full panel {})",
            fmt6(cb.minutes_estimate),
            fmt6(CostModel::default().minutes_full_panel)
        );
        let _ = writeln!(txt);
        let _ = writeln!(
            txt,
            "measured accuracy after retraining the reference solver on the panel:"
        );
        let _ = writeln!(
            txt,
            "  mean binary test accuracy: {}",
            fmt6(sub_ev.outcome.mean_test_accuracy)
        );
        let _ = writeln!(
            txt,
            "  multiclass test accuracy: {}",
            fmt6(sub_ev.outcome.multiclass_test_accuracy)
        );
        staging.add("part_5/cost_benefit.txt", txt);
        cost = Some(cb);
    }
    timed("cost-benefit", t0);

    // Wilson interval on the reference solver's multiclass test accuracy.
    let reference_wilson = match evaluated
        .iter()
        .find(|ev| ev.outcome.tag == SolverTag::Reference)
    {
        Some(ev) => Some(
            wilson_interval(ev.outcome.multiclass_test_correct, split.test.n(), 0.95)
                .map_err(|e| PipelineError::new("metrics", e))?,
        ),
        None => None,
    };

    if !cfg.solvers.gd {
        skipped.push("part_2 files (gd solver not selected)".to_owned());
    }

    let outcomes: Vec<SolverOutcome> = evaluated.iter().map(|ev| ev.outcome.clone()).collect();
    let summary_txt = render_summary(
        cfg,
        &split,
        &outcomes,
        reference_wilson,
        sparsity.as_deref(),
        importance.as_ref(),
        consistency_min_rho,
        cost.as_ref(),
        subset_mean_test_accuracy,
        subset_multiclass_test_accuracy,
        &skipped,
        &timings,
    );
    staging.add("summary.txt", summary_txt);

    let files_written = staging.flush(&out_dir)?;

    Ok(RunSummary {
        outcomes,
        train_size: split.train.n(),
        test_size: split.test.n(),
        reference_wilson,
        sparsity,
        consistency_min_rho,
        cost,
        subset_mean_test_accuracy,
        subset_multiclass_test_accuracy,
        files_written,
    })
}

#[allow(clippy::too_many_arguments)]
fn render_summary(
    cfg: &RunConfig,
    split: &SplitPair,
    outcomes: &[SolverOutcome],
    reference_wilson: Option<(f64, f64)>,
    sparsity: Option<&[SparsityEntry]>,
    importance: Option<&ImportanceReport>,
    consistency_min_rho: Option<f64>,
    cost: Option<&CostBenefit>,
    subset_mean_test_accuracy: Option<f64>,
    subset_multiclass_test_accuracy: Option<f64>,
    skipped: &[String],
    timings: &[(&'static str, f64)],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "one-vs-rest logistic regression run");
    let _ = writeln!(s, "===================================");
    let _ = writeln!(s);
    let _ = writeln!(s, "data: {}", cfg.data_path.display());
    let _ = writeln!(
        s,
        "seed: {}   test fraction: {}   train/test: {}/{}",
        cfg.seed,
        cfg.test_fraction,
        split.train.n(),
        split.test.n()
    );
    let solvers: Vec<&str> = cfg.solvers.tags().iter().map(|t| t.as_str()).collect();
    let _ = writeln!(s, "solvers: {}", solvers.join(", "));
    let _ = writeln!(s);

    let _ = writeln!(s, "accuracy (binary one-vs-rest tasks, threshold 1/2)");
    let _ = writeln!(
        s,
        "{:<11} {:>18} {:>17} {:>21}",
        "solver", "mean train acc", "mean test acc", "multiclass test acc"
    );
    for o in outcomes {
        let _ = writeln!(
            s,
            "{:<11} {:>18} {:>17} {:>21}",
            o.tag.as_str(),
            fmt6(o.mean_train_accuracy),
            fmt6(o.mean_test_accuracy),
            fmt6(o.multiclass_test_accuracy)
        );
    }
    let _ = writeln!(s);
    for o in outcomes {
        let _ = writeln!(
            s,
            "{} per-class test accuracy: {}",
            o.tag.as_str(),
            o.per_class_test_accuracy
                .iter()
                .map(|&a| fmt6(a))
                .collect::<Vec<_>>()
                .join(" / ")
        );
    }
    if let Some(o) = outcomes.iter().find(|o| o.tag == SolverTag::Gd) {
        if let Some(losses) = &o.final_losses {
            let _ = writeln!(
                s,
                "gd final training losses: {}",
                losses
                    .iter()
                    .map(|&l| fmt6(l))
                    .collect::<Vec<_>>()
                    .join(" / ")
            );
        }
    }
    let _ = writeln!(s);

    if let Some(o) = outcomes.iter().find(|o| o.tag == SolverTag::Reference) {
        let _ = writeln!(
            s,
            "reference multiclass test: {}/{} correct",
            o.multiclass_test_correct,
            split.test.n()
        );
        if let Some((lo, hi)) = reference_wilson {
            let _ = writeln!(
                s,
                "wilson 95% interval for that proportion: [{}, {}]",
                fmt6(lo),
                fmt6(hi)
            );
        }
        let _ = writeln!(s);
    }

    if let Some(entries) = sparsity {
        let _ = writeln!(s, "l1 sparsity (C = {}):", cfg.l1.c);
        for e in entries {
            let top = e
                .top_retained
                .as_ref()
                .map(|(name, w)| format!("top {} ({})", name, fmt6(*w)))
                .unwrap_or_else(|| "no features retained".to_owned());
            let _ = writeln!(
                s,
                "  class {}: retained {}/{}  {}",
                e.class,
                e.retained_count,
                e.retained_count + e.zeroed_count,
                top
            );
        }
        let _ = writeln!(s);
    }

    if let Some(report) = importance {
        let top = report
            .aggregate_ranking
            .iter()
            .take(5)
            .map(|&j| format!("{} ({})", report.feature_names[j], fmt6(report.aggregate[j])))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(s, "aggregate importance top-5: {top}");
        let _ = writeln!(s);
    }

    if let Some(min_rho) = consistency_min_rho {
        let seeds: Vec<String> = cfg.consistency_seeds.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            s,
            "rank consistency across seeds {{{}}}: min pairwise spearman rho = {}",
            seeds.join(", "),
            fmt6(min_rho)
        );
        let _ = writeln!(s);
    }

    if let Some(cb) = cost {
        let _ = writeln!(
            s,
            "cost model: {}-assay panel costs ${} per sample (saves ${}, {}% fewer assays, ~{} min)",
            cb.selected_count,
            fmt6(cb.cost_per_sample),
            fmt6(cb.saving_per_sample),
            fmt6(cb.complexity_reduction * 100.0),
            fmt6(cb.minutes_estimate)
        );
        if let (Some(mean_acc), Some(mc_acc)) =
            (subset_mean_test_accuracy, subset_multiclass_test_accuracy)
        {
            let _ = writeln!(
                s,
                "panel retrain (reference solver): mean binary test acc {}, multiclass test acc {}",
                fmt6(mean_acc),
                fmt6(mc_acc)
            );
        }
        let _ = writeln!(s);
    }

    if !skipped.is_empty() {
        let _ = writeln!(s, "omitted artifacts:");
        for note in skipped {
            let _ = writeln!(s, "  - {note}");
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "stage timings (ms):");
    for (name, ms) in timings {
        let _ = writeln!(s, "  {name}: {ms:.1}");
    }
    s
}

/// One row of the C sweep: sparsity and accuracy at a single penalty level.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub c: f64,
    pub mean_retained: f64,
    pub mean_test_accuracy: f64,
}

/// Trains the L1 solver at every C in the grid (ascending) on the configured
/// split and reports mean retained-feature count and mean binary test
/// accuracy per C. Writes `c_sweep.csv` when an output directory is set.
pub fn sweep_c(cfg: &RunConfig) -> Result<Vec<SweepRow>, PipelineError> {
    if cfg.c_grid.is_empty() {
        return Err(PipelineError::new("config", "empty C grid"));
    }
    let mut grid = cfg.c_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let ds = load_csv(&cfg.data_path, &cfg.label_column)
        .map_err(|e| PipelineError::new("load", e))?;
    let split = stratified_split(&ds, cfg.test_fraction, cfg.seed)
        .map_err(|e| PipelineError::new("split", e))?;

    let mut rows = Vec::with_capacity(grid.len());
    for &c in &grid {
        let l1 = L1Config { c, ..cfg.l1.clone() };
        let model = train_on_split(&split, &SolverSpec::L1(l1))
            .map_err(|e| PipelineError::new("train", format!("C={c}: {e}")))?;
        let test_probs = model
            .predict_proba(&split.test.features)
            .map_err(|e| PipelineError::new("predict", format!("C={c}: {e}")))?;
        let probs_by_class: Vec<Vec<f64>> = (0..model.class_count)
            .map(|k| test_probs.column(k).to_vec())
            .collect();
        let accs = binary_accuracies(&probs_by_class, &split.test.labels);
        let retained_total: usize = model
            .models
            .iter()
            .map(|m| crate::solvers::retained_features(m, DEFAULT_RETENTION_THRESHOLD).len())
            .sum();
        rows.push(SweepRow {
            c,
            mean_retained: retained_total as f64 / model.class_count as f64,
            mean_test_accuracy: accs.iter().sum::<f64>() / accs.len() as f64,
        });
    }

    if let Some(out_dir) = &cfg.output_dir {
        let mut csv = String::from("c,mean_retained,mean_test_accuracy\n");
        for row in &rows {
            let _ = writeln!(
                csv,
                "{},{},{}",
                fmt6(row.c),
                fmt6(row.mean_retained),
                fmt6(row.mean_test_accuracy)
            );
        }
        let mut staging = Staging::new();
        staging.add("c_sweep.csv", csv);
        staging.flush(out_dir)?;
    }
    Ok(rows)
}
