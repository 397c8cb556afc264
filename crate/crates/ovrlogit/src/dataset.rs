//! Loading, validation, stratified splitting, and one-vs-rest encoding of
//! labeled tabular data.

use std::fs::File;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("missing label column `{0}` in header")]
    MissingLabelColumn(String),
    #[error("empty dataset: {0} contains a header but no data rows")]
    Empty(String),
    #[error("no feature columns besides the label column")]
    NoFeatures,
    #[error("row {row}: expected {expected} columns, found {found}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column `{column}`: cannot parse {value:?} as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column `{column}`: non-finite value")]
    NonFinite { row: usize, column: String },
    #[error("row {row}: label {value:?} is not an integer class index")]
    BadLabel { row: usize, value: String },
    #[error("need at least two distinct classes, found {0}")]
    SingleClass(usize),
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("class {class} has only {count} sample(s); need at least 2 to split")]
    TinyClass { class: usize, count: usize },
    #[error("split left the {0} side empty; adjust the test fraction")]
    EmptySide(&'static str),
    #[error("class index {k} out of range for {class_count} classes")]
    ClassOutOfRange { k: usize, class_count: usize },
    #[error("binary encoding for class {k}: every sample is {side}")]
    DegenerateEncoding { k: usize, side: &'static str },
}

/// A feature matrix with integer class labels in `0..class_count`.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub feature_names: Vec<String>,
    pub class_count: usize,
}

impl LabeledDataset {
    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    /// Per-class sample counts, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Row-gather; keeps feature names and class count.
    fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let d = self.d();
        let mut features = Array2::zeros((indices.len(), d));
        let mut labels = Vec::with_capacity(indices.len());
        for (out, &i) in indices.iter().enumerate() {
            features.row_mut(out).assign(&self.features.row(i));
            labels.push(self.labels[i]);
        }
        LabeledDataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
            class_count: self.class_count,
        }
    }
}

/// One binary one-vs-rest task: targets are 1.0 for `positive_class`, else 0.0.
#[derive(Debug, Clone)]
pub struct BinaryDataset {
    pub features: Array2<f64>,
    pub targets: Array1<f64>,
    pub positive_class: usize,
}

impl BinaryDataset {
    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn positives(&self) -> usize {
        self.targets.iter().filter(|&&t| t == 1.0).count()
    }
}

/// A deterministic stratified train/test partition.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Row indices into the parent dataset, ascending.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub test_fraction: f64,
}

/// Reads a CSV with a header row: every column numeric except `label_column`,
/// which holds integer class indices. Distinct labels are remapped to
/// contiguous `0..K` preserving numeric order.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<LabeledDataset, DatasetError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: shown.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|source| DatasetError::Csv {
            path: shown.clone(),
            source,
        })?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DatasetError::MissingLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    if feature_names.is_empty() {
        return Err(DatasetError::NoFeatures);
    }

    let mut rows: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<i64> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|source| DatasetError::Csv {
            path: shown.clone(),
            source,
        })?;
        if record.len() != headers.len() {
            return Err(DatasetError::RowWidth {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let column = headers[col].to_string();
            if col == label_idx {
                let label: i64 = cell.trim().parse().map_err(|_| DatasetError::BadLabel {
                    row,
                    value: cell.to_string(),
                })?;
                raw_labels.push(label);
            } else {
                let value: f64 = cell.trim().parse().map_err(|_| DatasetError::NonNumericCell {
                    row,
                    column: column.clone(),
                    value: cell.to_string(),
                })?;
                if !value.is_finite() {
                    return Err(DatasetError::NonFinite { row, column });
                }
                rows.push(value);
            }
        }
    }

    let n = raw_labels.len();
    if n == 0 {
        return Err(DatasetError::Empty(shown));
    }
    let d = feature_names.len();

    // Remap distinct raw labels to 0..K preserving numeric order.
    let mut distinct: Vec<i64> = raw_labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(DatasetError::SingleClass(distinct.len()));
    }
    let labels: Vec<usize> = raw_labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label seen above"))
        .collect();

    let features = Array2::from_shape_vec((n, d), rows).expect("row-major cells");
    Ok(LabeledDataset {
        features,
        labels,
        feature_names,
        class_count: distinct.len(),
    })
}

/// Unbiased draw from `0..bound` using rejection sampling on the raw 64-bit
/// stream, so the result depends only on the keystream, not on any library's
/// range-reduction scheme.
fn bounded(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    if bound == 1 {
        return 0;
    }
    // 2^64 mod bound values at the top of the range would bias the modulus;
    // reject them. For desk-scale bounds the reject probability is ~0.
    let reject_over = u64::MAX - (u64::MAX - (bound - 1)) % bound;
    loop {
        let x = rng.next_u64();
        if x <= reject_over {
            return x % bound;
        }
    }
}

fn fisher_yates(items: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = bounded(rng, (i + 1) as u64) as usize;
        items.swap(i, j);
    }
}

/// One independent ChaCha8 stream per class: the 64-bit seed keys the cipher
/// and the class index selects the stream, so class k's shuffle is unaffected
/// by the other classes' group sizes.
fn class_rng(seed: u64, k: usize) -> ChaCha8Rng {
    // Fixed offset keeping class streams away from the zero stream and from
    // each other; part of the frozen split definition, like the seed itself.
    const STREAM_BASE: u64 = 2970;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_BASE + k as u64);
    rng
}

/// Deterministic stratified split: per class, shuffle that class's row
/// indices with a seeded ChaCha8 stream and reserve the first
/// `ceil(fraction * class_size)` for test, then decrement the classes with
/// the largest rounding overshoot until the global test size equals
/// `round(fraction * n)`. Both sides are returned in ascending row order.
pub fn stratified_split(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitPair, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::BadFraction(test_fraction));
    }
    let counts = ds.class_counts();
    for (class, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(DatasetError::TinyClass { class, count });
        }
    }

    // Per-class index groups in ascending row order, then shuffled.
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); ds.class_count];
    for (i, &l) in ds.labels.iter().enumerate() {
        groups[l].push(i);
    }
    for (k, group) in groups.iter_mut().enumerate() {
        fisher_yates(group, &mut class_rng(seed, k));
    }

    // ceil per class, then cap the total at round(fraction * n) by repeatedly
    // decrementing the class that overshoots its exact share the most.
    let mut take: Vec<usize> = counts
        .iter()
        .map(|&c| (test_fraction * c as f64).ceil() as usize)
        .collect();
    let total = (test_fraction * ds.n() as f64).round() as usize;
    while take.iter().sum::<usize>() > total {
        let mut worst = 0usize;
        let mut worst_over = f64::NEG_INFINITY;
        for k in 0..take.len() {
            if take[k] == 0 {
                continue;
            }
            let over = take[k] as f64 - test_fraction * counts[k] as f64;
            if over > worst_over {
                worst_over = over;
                worst = k;
            }
        }
        take[worst] -= 1;
    }

    let mut test_indices: Vec<usize> = Vec::with_capacity(total);
    for (k, group) in groups.iter().enumerate() {
        test_indices.extend_from_slice(&group[..take[k]]);
    }
    test_indices.sort_unstable();
    let in_test: std::collections::HashSet<usize> = test_indices.iter().copied().collect();
    let train_indices: Vec<usize> = (0..ds.n()).filter(|i| !in_test.contains(i)).collect();

    if test_indices.is_empty() {
        return Err(DatasetError::EmptySide("test"));
    }
    if train_indices.is_empty() {
        return Err(DatasetError::EmptySide("train"));
    }

    Ok(SplitPair {
        train: ds.subset(&train_indices),
        test: ds.subset(&test_indices),
        train_indices,
        test_indices,
        seed,
        test_fraction,
    })
}

/// Binary one-vs-rest view of class `k`: targets are 1.0 where the label
/// equals `k`, else 0.0. Features are copied unchanged.
pub fn ovr_encode(ds: &LabeledDataset, k: usize) -> Result<BinaryDataset, DatasetError> {
    if k >= ds.class_count {
        return Err(DatasetError::ClassOutOfRange {
            k,
            class_count: ds.class_count,
        });
    }
    let targets: Array1<f64> = ds
        .labels
        .iter()
        .map(|&l| if l == k { 1.0 } else { 0.0 })
        .collect();
    let positives = targets.iter().filter(|&&t| t == 1.0).count();
    if positives == 0 {
        return Err(DatasetError::DegenerateEncoding { k, side: "negative" });
    }
    if positives == ds.n() {
        return Err(DatasetError::DegenerateEncoding { k, side: "positive" });
    }
    Ok(BinaryDataset {
        features: ds.features.clone(),
        targets,
        positive_class: k,
    })
}
