//! Doc-test shims for the guide in `book/`.
//!
//! Each chapter is included as a documentation block, so every Rust snippet
//! in the book compiles and runs under `cargo test --doc` and cannot drift
//! away from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/datasets.md")]
pub mod datasets {}

#[doc = include_str!("../../../book/src/preprocessing.md")]
pub mod preprocessing {}

#[doc = include_str!("../../../book/src/feature-selection.md")]
pub mod feature_selection {}

#[doc = include_str!("../../../book/src/decision-trees.md")]
pub mod decision_trees {}

#[doc = include_str!("../../../book/src/naive-bayes.md")]
pub mod naive_bayes {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
