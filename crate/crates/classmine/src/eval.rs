//! Evaluation protocols and metrics: stratified k-fold cross-validation,
//! seeded percentage split, confusion matrix, Cohen's kappa and the
//! probabilistic error family (MAE, RMSE, RAE, RRSE) against a class-prior
//! baseline.
//!
//! Cross-validation pools every out-of-fold prediction and computes all
//! metrics once over the pooled set, so a run yields a single confusion
//! matrix covering the whole dataset.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{Learner, Prediction};

/// Row-major confusion counts: `counts[actual][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().map(|r| r.iter().sum::<usize>()).sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<usize> {
        (0..self.labels.len())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }
}

/// The error half of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mae: f64,
    pub rmse: f64,
    pub rae_pct: f64,
    pub rrse_pct: f64,
}

/// Evaluation protocol descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Protocol {
    CrossValidation { folds: usize, seed: u64 },
    PercentageSplit { train_pct: f64, seed: u64 },
}

impl Protocol {
    pub fn seed(&self) -> u64 {
        match self {
            Protocol::CrossValidation { seed, .. } | Protocol::PercentageSplit { seed, .. } => {
                *seed
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Protocol::CrossValidation { folds, seed } => format!("cv(folds={folds}, seed={seed})"),
            Protocol::PercentageSplit { train_pct, seed } => {
                format!("split(train_pct={train_pct}, seed={seed})")
            }
        }
    }
}

/// Everything a single evaluation run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub correct: usize,
    pub incorrect: usize,
    pub accuracy_pct: f64,
    pub kappa: f64,
    pub mae: f64,
    pub rmse: f64,
    pub rae_pct: f64,
    pub rrse_pct: f64,
    pub matrix: ConfusionMatrix,
    pub protocol: String,
    pub model: String,
    pub seed: u64,
}

/// The class-prior reference predictor used for RAE/RRSE: it answers the
/// same fixed distribution for every instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePredictor {
    pub priors: Vec<f64>,
}

impl BaselinePredictor {
    /// Raw (unsmoothed) class frequencies of the given dataset.
    pub fn from_dataset(dataset: &Dataset) -> BaselinePredictor {
        let mut counts = vec![0usize; dataset.class_labels().len()];
        for inst in &dataset.instances {
            counts[dataset.class_of(inst)] += 1;
        }
        let n = dataset.len() as f64;
        BaselinePredictor {
            priors: counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    indices
}

/// Deterministic seeded shuffle followed by a `round(N * pct / 100)` cut.
pub fn percentage_split(
    dataset: &Dataset,
    train_pct: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_pct > 0.0 && train_pct < 100.0) {
        return Err(Error::Validation(format!(
            "train percentage must lie strictly between 0 and 100, got {train_pct}"
        )));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(Error::Validation("need at least 2 instances to split".into()));
    }
    let train_n = (n as f64 * train_pct / 100.0).round() as usize;
    if train_n == 0 || train_n == n {
        return Err(Error::Validation(format!(
            "split would leave an empty side (train {train_n} of {n})"
        )));
    }
    let indices = shuffled_indices(n, seed);
    Ok((
        dataset.select_rows(&indices[..train_n]),
        dataset.select_rows(&indices[train_n..]),
    ))
}

/// Stratified fold assignment: after a seeded shuffle, instances are grouped
/// by class and dealt round-robin, so overall fold sizes and per-class fold
/// counts both differ by at most one.
pub fn stratified_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = dataset.len();
    if k < 2 {
        return Err(Error::Validation("need at least 2 folds".into()));
    }
    if k > n {
        return Err(Error::Validation(format!(
            "cannot make {k} folds from {n} instances"
        )));
    }
    let shuffled = shuffled_indices(n, seed);
    let n_classes = dataset.class_labels().len();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for &idx in &shuffled {
        by_class[dataset.class_of(&dataset.instances[idx])].push(idx);
    }
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut position = 0usize;
    for class_rows in by_class {
        for idx in class_rows {
            folds[position % k].push(idx);
            position += 1;
        }
    }
    Ok(folds)
}

/// Count actual/predicted label pairs into a matrix.
pub fn confusion_matrix(
    labels: &[String],
    actual: &[usize],
    predicted: &[usize],
) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::Eval(format!(
            "actual ({}) and predicted ({}) differ in length",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::Eval("no predictions to score".into()));
    }
    let c = labels.len();
    let mut counts = vec![vec![0usize; c]; c];
    for (&a, &p) in actual.iter().zip(predicted) {
        if a >= c || p >= c {
            return Err(Error::Eval(format!("label index out of range ({a}, {p})")));
        }
        counts[a][p] += 1;
    }
    Ok(ConfusionMatrix {
        labels: labels.to_vec(),
        counts,
    })
}

/// Cohen's kappa `(p_o - p_e) / (1 - p_e)`; defined as 0 in the degenerate
/// case `p_e = 1` (all mass in one row/column pair).
pub fn kappa(matrix: &ConfusionMatrix) -> Result<f64> {
    let total = matrix.total();
    if total == 0 {
        return Err(Error::Eval("kappa of an empty matrix is undefined".into()));
    }
    let n = total as f64;
    let p_o = matrix.correct() as f64 / n;
    let rows = matrix.row_sums();
    let cols = matrix.column_sums();
    let p_e: f64 = rows
        .iter()
        .zip(&cols)
        .map(|(&r, &c)| (r as f64) * (c as f64))
        .sum::<f64>()
        / (n * n);
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(0.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// MAE/RMSE of probabilistic predictions against one-hot targets, plus their
/// percentages relative to the baseline predictor.
pub fn probabilistic_errors(
    predictions: &[Prediction],
    actual: &[usize],
    baseline: &BaselinePredictor,
) -> Result<ErrorMetrics> {
    if predictions.len() != actual.len() {
        return Err(Error::Eval(
            "predictions and actuals differ in length".into(),
        ));
    }
    if predictions.is_empty() {
        return Err(Error::Eval("no predictions to score".into()));
    }
    let c = baseline.priors.len();
    for p in predictions {
        if p.probabilities.len() != c {
            return Err(Error::Eval("prediction width mismatch".into()));
        }
        let s: f64 = p.probabilities.iter().sum();
        if (s - 1.0).abs() > 1e-6 {
            return Err(Error::Eval(format!(
                "prediction distribution sums to {s}, expected 1"
            )));
        }
    }

    let accumulate = |probs_of: &dyn Fn(usize) -> Vec<f64>| -> (f64, f64) {
        let mut abs_sum = 0.0;
        let mut sq_sum = 0.0;
        for (i, &a) in actual.iter().enumerate() {
            let probs = probs_of(i);
            for (label, &p) in probs.iter().enumerate() {
                let target = if label == a { 1.0 } else { 0.0 };
                abs_sum += (p - target).abs();
                sq_sum += (p - target) * (p - target);
            }
        }
        let n = actual.len() as f64;
        let c = c as f64;
        (abs_sum / (n * c), (sq_sum / (n * c)).sqrt())
    };

    let (mae, rmse) = accumulate(&|i| predictions[i].probabilities.clone());
    let (base_mae, base_rmse) = accumulate(&|_| baseline.priors.clone());
    if base_mae == 0.0 || base_rmse == 0.0 {
        return Err(Error::Eval(
            "baseline error is zero (single-class data); relative errors undefined".into(),
        ));
    }
    Ok(ErrorMetrics {
        mae,
        rmse,
        rae_pct: 100.0 * mae / base_mae,
        rrse_pct: 100.0 * rmse / base_rmse,
    })
}

/// Train and score a learner under a protocol.
///
/// Cross-validation trains on k-1 folds, collects the held-out fold's
/// predictions, and computes the metrics once over all pooled out-of-fold
/// predictions (baseline from the full dataset). A percentage split trains
/// on the train part and scores the test part (baseline from the train
/// part).
pub fn evaluate(
    learner: &dyn Learner,
    dataset: &Dataset,
    protocol: &Protocol,
) -> Result<EvaluationReport> {
    let labels = dataset.class_labels().to_vec();
    let (predictions, actual, baseline) = match protocol {
        Protocol::CrossValidation { folds, seed } => {
            let fold_indices = stratified_folds(dataset, *folds, *seed)?;
            // Pool slots by original row so the outcome is independent of
            // fold processing order.
            let mut pooled: Vec<Option<Prediction>> = vec![None; dataset.len()];
            for fold in &fold_indices {
                let in_fold: std::collections::HashSet<usize> = fold.iter().copied().collect();
                let train_rows: Vec<usize> =
                    (0..dataset.len()).filter(|r| !in_fold.contains(r)).collect();
                let train = dataset.select_rows(&train_rows);
                let fitted = learner.fit(&train)?;
                for &row in fold {
                    pooled[row] = Some(fitted.predict(&dataset.instances[row])?);
                }
            }
            let predictions: Vec<Prediction> =
                pooled.into_iter().map(|p| p.expect("folds partition the dataset")).collect();
            let actual: Vec<usize> = dataset
                .instances
                .iter()
                .map(|i| dataset.class_of(i))
                .collect();
            (predictions, actual, BaselinePredictor::from_dataset(dataset))
        }
        Protocol::PercentageSplit { train_pct, seed } => {
            let (train, test) = percentage_split(dataset, *train_pct, *seed)?;
            let fitted = learner.fit(&train)?;
            let mut predictions = Vec::with_capacity(test.len());
            let mut actual = Vec::with_capacity(test.len());
            for inst in &test.instances {
                predictions.push(fitted.predict(inst)?);
                actual.push(test.class_of(inst));
            }
            (predictions, actual, BaselinePredictor::from_dataset(&train))
        }
    };

    let predicted: Vec<usize> = predictions.iter().map(|p| p.predicted).collect();
    let matrix = confusion_matrix(&labels, &actual, &predicted)?;
    let correct = matrix.correct();
    let total = matrix.total();
    let errors = probabilistic_errors(&predictions, &actual, &baseline)?;
    Ok(EvaluationReport {
        correct,
        incorrect: total - correct,
        accuracy_pct: 100.0 * correct as f64 / total as f64,
        kappa: kappa(&matrix)?,
        mae: errors.mae,
        rmse: errors.rmse,
        rae_pct: errors.rae_pct,
        rrse_pct: errors.rrse_pct,
        matrix,
        protocol: protocol.describe(),
        model: learner.describe(),
        seed: protocol.seed(),
    })
}
