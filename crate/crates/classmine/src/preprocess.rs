//! Missing-value imputation, min-max normalization and descriptive
//! statistics.
//!
//! Both filters follow the fit/apply split: parameters are learned on one
//! dataset and can then be applied to any dataset with the same schema.
//! Normalization maps each numeric attribute linearly onto [0, 1] by its
//! observed range; out-of-range values extrapolate (no clamping), keeping the
//! map invertible.

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeKind, Dataset, Instance, Value};
use crate::error::{Error, Result};

/// Replacement value for one attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeValue {
    /// Mean of the non-missing numeric cells.
    Mean(f64),
    /// Modal category index (ties broken by lowest index).
    Mode(usize),
}

/// Fitted imputation parameters, one entry per attribute (class is `None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationParams {
    pub schema_fingerprint: String,
    pub per_attribute: Vec<Option<ImputeValue>>,
}

/// Fitted `(min, max)` ranges per numeric attribute (`None` elsewhere).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub schema_fingerprint: String,
    pub ranges: Vec<Option<(f64, f64)>>,
}

/// Which denominator the standard deviation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdDevMode {
    /// n - 1 denominator (the default).
    #[default]
    Sample,
    /// n denominator.
    Population,
}

/// Summary row for one numeric attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeStatsRow {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub stddev: f64,
}

/// Descriptive statistics over all numeric attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeStats {
    pub rows: Vec<AttributeStatsRow>,
    pub stddev_mode: StdDevMode,
}

impl AttributeStats {
    pub fn row(&self, name: &str) -> Option<&AttributeStatsRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Learn per-attribute replacement values: numeric mean over non-missing
/// cells, nominal mode with ties broken by lowest category index.
pub fn fit_impute(dataset: &Dataset) -> Result<ImputationParams> {
    let mut per_attribute = Vec::with_capacity(dataset.schema.len());
    for spec in &dataset.schema {
        if spec.index == dataset.class_index {
            per_attribute.push(None);
            continue;
        }
        let value = match spec.kind {
            AttributeKind::Numeric => {
                let mut sum = 0.0;
                let mut n = 0usize;
                for inst in &dataset.instances {
                    if let Value::Num(x) = inst.values[spec.index] {
                        sum += x;
                        n += 1;
                    }
                }
                if n == 0 {
                    return Err(Error::Fit(format!(
                        "attribute '{}' has no non-missing values",
                        spec.name
                    )));
                }
                ImputeValue::Mean(sum / n as f64)
            }
            AttributeKind::Nominal => {
                let mut counts = vec![0usize; spec.nominal_values.len()];
                for inst in &dataset.instances {
                    if let Value::Cat(c) = inst.values[spec.index] {
                        counts[c] += 1;
                    }
                }
                if counts.iter().all(|&c| c == 0) {
                    return Err(Error::Fit(format!(
                        "attribute '{}' has no non-missing values",
                        spec.name
                    )));
                }
                // max_by_key keeps the last max; scan forward keeping strict
                // improvement so ties resolve to the lowest index.
                let mut best = 0usize;
                for (i, &c) in counts.iter().enumerate() {
                    if c > counts[best] {
                        best = i;
                    }
                }
                ImputeValue::Mode(best)
            }
        };
        per_attribute.push(Some(value));
    }
    Ok(ImputationParams {
        schema_fingerprint: dataset.schema_fingerprint(),
        per_attribute,
    })
}

/// Replace every missing marker using fitted parameters. Non-missing cells
/// pass through untouched.
pub fn apply_impute(params: &ImputationParams, dataset: &Dataset) -> Result<Dataset> {
    if params.schema_fingerprint != dataset.schema_fingerprint() {
        return Err(Error::Validation(
            "imputation parameters were fitted on a different schema".into(),
        ));
    }
    let mut out = dataset.clone();
    for inst in &mut out.instances {
        impute_instance(params, inst);
    }
    Ok(out)
}

/// In-place imputation of a single instance.
pub(crate) fn impute_instance(params: &ImputationParams, instance: &mut Instance) {
    for (col, value) in instance.values.iter_mut().enumerate() {
        if value.is_missing() {
            match params.per_attribute[col] {
                Some(ImputeValue::Mean(m)) => *value = Value::Num(m),
                Some(ImputeValue::Mode(c)) => *value = Value::Cat(c),
                None => {}
            }
        }
    }
}

/// Learn per-attribute observed ranges. Requires a fully imputed dataset.
pub fn fit_normalize(dataset: &Dataset) -> Result<NormalizationParams> {
    let mut ranges = Vec::with_capacity(dataset.schema.len());
    for spec in &dataset.schema {
        if spec.kind != AttributeKind::Numeric {
            ranges.push(None);
            continue;
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for inst in &dataset.instances {
            match inst.values[spec.index] {
                Value::Num(x) => {
                    min = min.min(x);
                    max = max.max(x);
                }
                Value::Missing => {
                    return Err(Error::Validation(format!(
                        "attribute '{}' still has missing values; run imputation first",
                        spec.name
                    )));
                }
                Value::Cat(_) => unreachable!("numeric column holds no categories"),
            }
        }
        if dataset.is_empty() {
            return Err(Error::Validation("cannot fit on an empty dataset".into()));
        }
        ranges.push(Some((min, max)));
    }
    Ok(NormalizationParams {
        schema_fingerprint: dataset.schema_fingerprint(),
        ranges,
    })
}

/// Map each numeric cell x to (x - min) / (max - min). Constant attributes
/// (min == max) map to 0. Nominal and class cells are unchanged.
pub fn apply_normalize(params: &NormalizationParams, dataset: &Dataset) -> Result<Dataset> {
    if params.schema_fingerprint != dataset.schema_fingerprint() {
        return Err(Error::Validation(
            "normalization parameters were fitted on a different schema".into(),
        ));
    }
    let mut out = dataset.clone();
    for inst in &mut out.instances {
        normalize_instance(params, inst);
    }
    Ok(out)
}

/// In-place normalization of a single instance.
pub(crate) fn normalize_instance(params: &NormalizationParams, instance: &mut Instance) {
    for (col, value) in instance.values.iter_mut().enumerate() {
        if let (Value::Num(x), Some((min, max))) = (&*value, params.ranges[col]) {
            let mapped = if max > min { (x - min) / (max - min) } else { 0.0 };
            *value = Value::Num(mapped);
        }
    }
}

/// Min, max, mean and standard deviation of every numeric attribute,
/// computed over non-missing cells.
pub fn descriptive_stats(dataset: &Dataset, mode: StdDevMode) -> AttributeStats {
    let mut rows = Vec::new();
    for spec in &dataset.schema {
        if spec.kind != AttributeKind::Numeric {
            continue;
        }
        let xs: Vec<f64> = dataset
            .instances
            .iter()
            .filter_map(|i| i.values[spec.index].as_num())
            .collect();
        if xs.is_empty() {
            continue;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        let denom = match mode {
            StdDevMode::Sample if xs.len() > 1 => n - 1.0,
            StdDevMode::Sample => 1.0,
            StdDevMode::Population => n,
        };
        rows.push(AttributeStatsRow {
            name: spec.name.clone(),
            min: xs.iter().cloned().fold(f64::INFINITY, f64::min),
            max: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mean,
            stddev: (ss / denom).sqrt(),
        });
    }
    AttributeStats {
        rows,
        stddev_mode: mode,
    }
}
