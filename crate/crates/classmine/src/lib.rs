//! classmine: a small classification-mining toolkit for UCI-style CSV data.
//!
//! The crate covers the classic tabular workflow end to end:
//!
//! * [`dataset`] — typed schema inference and CSV ingestion;
//! * [`preprocess`] — mean/mode imputation and min-max normalization;
//! * [`feature_select`] — correlation-based feature subset selection (CFS)
//!   over MDL-discretized attributes, searched best-first;
//! * [`tree`] — C4.5-style decision trees with gain-ratio splits and
//!   pessimistic pruning;
//! * [`bayes`] — naive Bayes with Gaussian numeric likelihoods;
//! * [`eval`] — stratified cross-validation, percentage split, confusion
//!   matrices, kappa and probabilistic error metrics;
//! * [`pipeline`] — a reproducible, seeded experiment runner behind the
//!   `classmine` binary.
//!
//! ```
//! use classmine::dataset::{parse_csv, ParseOptions};
//! use classmine::model::ModelSpec;
//! use classmine::eval::{evaluate, Protocol};
//!
//! let csv = "\
//! temp,windy,play
//! 0.30,no,yes
//! 0.45,no,yes
//! 0.81,yes,no
//! 0.92,no,no
//! 0.35,yes,yes
//! 0.77,yes,no";
//! let data = parse_csv(csv, &ParseOptions::default())?;
//! let report = evaluate(
//!     &ModelSpec::j48_default(),
//!     &data,
//!     &Protocol::CrossValidation { folds: 3, seed: 1 },
//! )?;
//! assert_eq!(report.matrix.total(), 6);
//! # Ok::<(), classmine::error::Error>(())
//! ```

#[cfg(doctest)]
mod book;

pub mod bayes;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod feature_select;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod tree;

pub use error::{Error, Result};
