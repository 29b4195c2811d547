//! Shared classifier surface: a prediction type, the algorithm registry and
//! the learner abstraction the evaluation harness trains through.

use serde::{Deserialize, Serialize};

use crate::bayes::{fit_nb, posterior, NaiveBayesModel};
use crate::dataset::{Dataset, Instance};
use crate::error::Result;
use crate::tree::{DecisionTree, TreeParams};

/// Class probabilities plus the argmax label index (ties resolve to the
/// lowest index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probabilities: Vec<f64>,
    pub predicted: usize,
}

/// Anything that can be fitted on a dataset and then score instances.
pub trait Learner {
    fn fit(&self, train: &Dataset) -> Result<Box<dyn Fitted>>;
    /// Short human-readable descriptor recorded in reports.
    fn describe(&self) -> String;
}

/// A fitted classifier.
pub trait Fitted {
    fn predict(&self, instance: &Instance) -> Result<Prediction>;
}

/// Algorithm choice for training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "algorithm")]
pub enum ModelSpec {
    J48 { params: TreeParams },
    NaiveBayes,
}

impl ModelSpec {
    pub fn j48_default() -> Self {
        ModelSpec::J48 {
            params: TreeParams::default(),
        }
    }

    /// Train a concrete model.
    pub fn fit_model(&self, train: &Dataset) -> Result<Model> {
        match self {
            ModelSpec::J48 { params } => Ok(Model::Tree(DecisionTree::fit(train, params)?)),
            ModelSpec::NaiveBayes => Ok(Model::Bayes(fit_nb(train)?)),
        }
    }
}

impl Learner for ModelSpec {
    fn fit(&self, train: &Dataset) -> Result<Box<dyn Fitted>> {
        Ok(Box::new(self.fit_model(train)?))
    }

    fn describe(&self) -> String {
        match self {
            ModelSpec::J48 { params } => format!(
                "j48(min_leaf={}, cf={}, prune={}, criterion={})",
                params.min_leaf_instances,
                params.confidence_factor,
                params.prune,
                match params.criterion {
                    crate::tree::SplitCriterion::GainRatio => "gain_ratio",
                    crate::tree::SplitCriterion::InfoGain => "info_gain",
                }
            ),
            ModelSpec::NaiveBayes => "naive_bayes".to_string(),
        }
    }
}

/// A trained classifier of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Model {
    Tree(DecisionTree),
    Bayes(NaiveBayesModel),
}

impl Model {
    pub fn predict(&self, instance: &Instance) -> Result<Prediction> {
        match self {
            Model::Tree(t) => t.predict(instance),
            Model::Bayes(m) => posterior(m, instance),
        }
    }

    /// Stable JSON dump of the fitted parameters.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl Fitted for Model {
    fn predict(&self, instance: &Instance) -> Result<Prediction> {
        Model::predict(self, instance)
    }
}
