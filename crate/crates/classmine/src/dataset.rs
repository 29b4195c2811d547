//! Dataset schema, instance storage and CSV ingestion for UCI-style
//! classification data.
//!
//! A [`Dataset`] couples a typed schema (numeric and nominal attributes, one
//! of which is the class) with a stable, load-ordered list of instances.
//! Values are stored as [`Value`] cells; missing cells are explicit so that
//! downstream filters can reason about them.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Whether an attribute holds numbers or categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    Nominal,
}

/// One column of the schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    /// Ordered category labels; empty for numeric attributes.
    pub nominal_values: Vec<String>,
    /// 0-based column position.
    pub index: usize,
}

impl AttributeSpec {
    pub fn is_numeric(&self) -> bool {
        self.kind == AttributeKind::Numeric
    }

    /// Index of `label` within this attribute's category list.
    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.nominal_values.iter().position(|v| v == label)
    }
}

/// A single cell: numeric value, nominal category index, or the missing marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Num(f64),
    Cat(usize),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    /// Numeric payload, if any.
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            _ => None,
        }
    }

    /// Category index payload, if any.
    pub fn as_cat(&self) -> Option<usize> {
        match self {
            Value::Cat(c) => Some(*c),
            _ => None,
        }
    }
}

/// One row of the dataset. Cell count always equals the schema width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<Value>,
}

impl Instance {
    pub fn new(values: Vec<Value>) -> Self {
        Instance { values }
    }
}

/// Per-label instance counts in schema label order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub labels: Vec<String>,
    pub counts: Vec<usize>,
    pub total: usize,
}

impl ClassDistribution {
    /// Count for a given label, if the label exists.
    pub fn count_of(&self, label: &str) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.counts[i])
    }
}

/// How to locate the class column while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassColumn {
    /// Use the last column.
    Last,
    /// Use the column with this header name.
    Named(String),
}

impl Default for ClassColumn {
    fn default() -> Self {
        ClassColumn::Last
    }
}

/// Options controlling CSV ingestion.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub class_column: ClassColumn,
    /// Pin the class label order instead of file-discovery order. Every label
    /// found in the file must appear in this list.
    pub label_order: Option<Vec<String>>,
    /// Rewrites applied to raw class cells before interning, e.g. "1" ->
    /// "tested_positive" for files that encode the class numerically.
    pub class_aliases: Vec<(String, String)>,
    /// Names of numeric columns in which a literal 0 is reinterpreted as the
    /// missing marker. Off by default: raw zeros are kept as data.
    pub zeros_as_missing: Vec<String>,
}

/// A schema plus its instances. Immutable after construction; instance order
/// is load order until an explicit shuffle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: Vec<AttributeSpec>,
    pub class_index: usize,
    pub instances: Vec<Instance>,
}

impl Dataset {
    /// Number of instances.
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// The class attribute spec.
    pub fn class_attribute(&self) -> &AttributeSpec {
        &self.schema[self.class_index]
    }

    /// Ordered class labels.
    pub fn class_labels(&self) -> &[String] {
        &self.class_attribute().nominal_values
    }

    /// Class category index of an instance.
    pub fn class_of(&self, instance: &Instance) -> usize {
        instance.values[self.class_index]
            .as_cat()
            .expect("class cell is never missing")
    }

    /// Attribute specs excluding the class column.
    pub fn predictors(&self) -> impl Iterator<Item = &AttributeSpec> {
        let class_index = self.class_index;
        self.schema.iter().filter(move |a| a.index != class_index)
    }

    /// Attribute spec by header name.
    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.schema.iter().find(|a| a.name == name)
    }

    /// True when any cell of any instance is the missing marker.
    pub fn has_missing(&self) -> bool {
        self.instances
            .iter()
            .any(|i| i.values.iter().any(Value::is_missing))
    }

    /// Hex digest identifying the schema (names, kinds, category lists and
    /// class position). Fitted parameters carry it to detect mismatched use.
    pub fn schema_fingerprint(&self) -> String {
        let mut canon = String::new();
        for a in &self.schema {
            let _ = write!(canon, "{}|{:?}|{}|", a.name, a.kind, a.nominal_values.join(","));
        }
        let _ = write!(canon, "class={}", self.class_index);
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        hex_string(&hasher.finalize())
    }

    /// New dataset holding only the given rows (by index), in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            class_index: self.class_index,
            instances: rows.iter().map(|&r| self.instances[r].clone()).collect(),
        }
    }

    /// New dataset keeping only the given predictor columns plus the class.
    /// `keep` holds original attribute indices; their relative order is kept.
    pub fn select_columns(&self, keep: &[usize]) -> Result<Dataset> {
        let mut order: Vec<usize> = keep.to_vec();
        order.sort_unstable();
        order.dedup();
        if order.iter().any(|&i| i >= self.schema.len()) {
            return Err(Error::Schema("column index out of range".into()));
        }
        if !order.contains(&self.class_index) {
            order.push(self.class_index);
        }
        let schema: Vec<AttributeSpec> = order
            .iter()
            .enumerate()
            .map(|(new_idx, &old_idx)| {
                let mut spec = self.schema[old_idx].clone();
                spec.index = new_idx;
                spec
            })
            .collect();
        let class_index = order
            .iter()
            .position(|&i| i == self.class_index)
            .expect("class column retained");
        let instances = self
            .instances
            .iter()
            .map(|inst| Instance::new(order.iter().map(|&i| inst.values[i]).collect()))
            .collect();
        Ok(Dataset {
            schema,
            class_index,
            instances,
        })
    }

    /// Render the dataset back to CSV text. Missing cells become `?`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.schema.iter().map(|a| a.name.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for inst in &self.instances {
            let row: Vec<String> = inst
                .values
                .iter()
                .zip(&self.schema)
                .map(|(v, spec)| match v {
                    Value::Missing => "?".to_string(),
                    Value::Num(x) => format_number(*x),
                    Value::Cat(c) => spec.nominal_values[*c].clone(),
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Shortest round-trip decimal rendering of a float.
fn format_number(x: f64) -> String {
    format!("{x}")
}

/// Accepts plain decimals with a `.` separator and scientific notation.
/// Rejects non-finite spellings so that columns containing them fall back to
/// nominal.
fn parse_numeric(cell: &str) -> Option<f64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return None;
    }
    match trimmed.parse::<f64>() {
        Ok(x) if x.is_finite() => Some(x),
        _ => None,
    }
}

fn is_missing_marker(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t == "?"
}

/// Parse a CSV document (header row required) into a typed [`Dataset`].
///
/// Column kinds are inferred: a column is numeric when every non-missing cell
/// parses as a number, otherwise nominal. Empty cells and the literal `?`
/// become the missing marker. The class column is always nominal, and class
/// cells may never be missing.
pub fn parse_csv(text: &str, options: &ParseOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() {
        return Err(Error::Schema("empty header row".into()));
    }
    let mut seen = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::Schema(format!("empty header name in column {}", i + 1)));
        }
        if let Some(prev) = seen.insert(name.clone(), i) {
            return Err(Error::Schema(format!(
                "duplicate header name '{name}' (columns {} and {})",
                prev + 1,
                i + 1
            )));
        }
    }
    let width = header.len();

    let class_index = match &options.class_column {
        ClassColumn::Last => width - 1,
        ClassColumn::Named(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("class column '{name}' not found")))?,
    };

    // First pass: collect raw cells, validating shape.
    let mut rows: Vec<Vec<String>> = Vec::new();
    for result in reader.records() {
        let record = result?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(rows.len() + 2);
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} cells, found {}", record.len()),
            });
        }
        let mut cells: Vec<String> = record.iter().map(|c| c.trim().to_string()).collect();
        let class_cell = &mut cells[class_index];
        if is_missing_marker(class_cell) {
            return Err(Error::Validation(format!(
                "class cell missing at line {line}"
            )));
        }
        if let Some((_, to)) = options
            .class_aliases
            .iter()
            .find(|(from, _)| from == class_cell.as_str())
        {
            *class_cell = to.clone();
        }
        rows.push(cells);
    }
    if rows.is_empty() {
        return Err(Error::Validation("no data rows".into()));
    }

    // Infer column kinds over non-missing cells.
    let mut schema = Vec::with_capacity(width);
    for (col, name) in header.iter().enumerate() {
        let numeric = col != class_index
            && rows.iter().all(|r| {
                is_missing_marker(&r[col]) || parse_numeric(&r[col]).is_some()
            });
        if numeric {
            schema.push(AttributeSpec {
                name: name.clone(),
                kind: AttributeKind::Numeric,
                nominal_values: Vec::new(),
                index: col,
            });
        } else {
            // Discovery order of distinct values.
            let mut values: Vec<String> = Vec::new();
            for r in &rows {
                let cell = &r[col];
                if !is_missing_marker(cell) && !values.iter().any(|v| v == cell) {
                    values.push(cell.clone());
                }
            }
            if col == class_index {
                if let Some(order) = &options.label_order {
                    for v in &values {
                        if !order.contains(v) {
                            return Err(Error::Schema(format!(
                                "class label '{v}' not covered by the pinned label order"
                            )));
                        }
                    }
                    values = order.clone();
                }
            }
            schema.push(AttributeSpec {
                name: name.clone(),
                kind: AttributeKind::Nominal,
                nominal_values: values,
                index: col,
            });
        }
    }

    let zero_cols: Vec<usize> = options
        .zeros_as_missing
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("zeros-as-missing column '{name}' not found")))
        })
        .collect::<Result<_>>()?;
    if zero_cols.contains(&class_index) {
        return Err(Error::Schema(
            "the class column cannot be zeros-as-missing".into(),
        ));
    }

    // Second pass: typed cells.
    let mut instances = Vec::with_capacity(rows.len());
    for (row_idx, cells) in rows.iter().enumerate() {
        let line = row_idx + 2; // header is line 1
        let mut values = Vec::with_capacity(width);
        for (col, cell) in cells.iter().enumerate() {
            let spec = &schema[col];
            let value = if is_missing_marker(cell) {
                Value::Missing
            } else {
                match spec.kind {
                    AttributeKind::Numeric => {
                        let x = parse_numeric(cell).ok_or_else(|| Error::Parse {
                            line,
                            message: format!("'{cell}' is not numeric in column '{}'", spec.name),
                        })?;
                        if x == 0.0 && zero_cols.contains(&col) {
                            Value::Missing
                        } else {
                            Value::Num(x)
                        }
                    }
                    AttributeKind::Nominal => {
                        let idx = spec.category_index(cell).ok_or_else(|| Error::Parse {
                            line,
                            message: format!("unknown category '{cell}' in column '{}'", spec.name),
                        })?;
                        Value::Cat(idx)
                    }
                }
            };
            values.push(value);
        }
        instances.push(Instance::new(values));
    }

    Ok(Dataset {
        schema,
        class_index,
        instances,
    })
}

/// Exact per-label instance counts, in schema label order.
pub fn class_distribution(dataset: &Dataset) -> ClassDistribution {
    let labels = dataset.class_labels().to_vec();
    let mut counts = vec![0usize; labels.len()];
    for inst in &dataset.instances {
        counts[dataset.class_of(inst)] += 1;
    }
    ClassDistribution {
        labels,
        counts,
        total: dataset.len(),
    }
}
