//! Naive Bayes with Laplace-smoothed priors, Gaussian likelihoods for
//! numeric attributes and Laplace-smoothed category counts for nominal ones.
//!
//! Scoring happens in the log domain: `score(c) = log P(c) + sum_a log
//! P(x_a | c)`. Posterior probabilities are recovered by max-shifted
//! exponentiation and normalization, which realizes the division by the
//! evidence `P(x)`.

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeKind, Dataset, Instance};
use crate::error::{Error, Result};
use crate::model::Prediction;

/// Numeric likelihoods never use a standard deviation below this, keeping
/// densities finite on (near-)constant columns.
pub const STDDEV_FLOOR: f64 = 1e-6;

/// Mean and standard deviation of one (class, attribute) Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mean: f64,
    pub stddev: f64,
}

impl GaussianParams {
    fn log_density(&self, x: f64) -> f64 {
        let d = (x - self.mean) / self.stddev;
        -self.stddev.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * d * d
    }
}

/// Likelihood model of one attribute under one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeLikelihood {
    Gaussian(GaussianParams),
    /// Laplace-smoothed probabilities per category; rows sum to 1.
    Categorical(Vec<f64>),
    /// No training data for this (class, attribute): contributes nothing.
    Absent,
}

/// A fitted naive Bayes classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub schema_fingerprint: String,
    pub class_labels: Vec<String>,
    /// Laplace-smoothed class priors `(n_c + 1) / (N + C)`; always positive.
    pub priors: Vec<f64>,
    /// `likelihoods[class][attribute]`; the class column itself is `Absent`.
    pub likelihoods: Vec<Vec<AttributeLikelihood>>,
    class_index: usize,
}

/// Fit priors and per-class likelihood parameters.
///
/// Priors use add-one smoothing. Gaussians use the per-class sample mean and
/// standard deviation (n-1 denominator), floored at [`STDDEV_FLOOR`]; nominal
/// likelihoods use add-one smoothed category frequencies.
pub fn fit_nb(dataset: &Dataset) -> Result<NaiveBayesModel> {
    if dataset.is_empty() {
        return Err(Error::Fit("cannot fit on an empty dataset".into()));
    }
    if dataset.has_missing() {
        return Err(Error::Fit(
            "missing value encountered; run imputation first".into(),
        ));
    }
    let labels = dataset.class_labels().to_vec();
    let n_classes = labels.len();
    let n = dataset.len();

    let mut class_counts = vec![0usize; n_classes];
    for inst in &dataset.instances {
        class_counts[dataset.class_of(inst)] += 1;
    }
    let priors: Vec<f64> = class_counts
        .iter()
        .map(|&c| (c as f64 + 1.0) / (n as f64 + n_classes as f64))
        .collect();

    let mut likelihoods = Vec::with_capacity(n_classes);
    for class in 0..n_classes {
        let members: Vec<&Instance> = dataset
            .instances
            .iter()
            .filter(|i| dataset.class_of(i) == class)
            .collect();
        let mut row = Vec::with_capacity(dataset.schema.len());
        for spec in &dataset.schema {
            if spec.index == dataset.class_index {
                row.push(AttributeLikelihood::Absent);
                continue;
            }
            let lik = match spec.kind {
                AttributeKind::Numeric => {
                    if members.is_empty() {
                        AttributeLikelihood::Absent
                    } else {
                        let xs: Vec<f64> = members
                            .iter()
                            .map(|i| i.values[spec.index].as_num().expect("imputed numeric"))
                            .collect();
                        let m = xs.iter().sum::<f64>() / xs.len() as f64;
                        let var = if xs.len() > 1 {
                            xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
                                / (xs.len() as f64 - 1.0)
                        } else {
                            0.0
                        };
                        AttributeLikelihood::Gaussian(GaussianParams {
                            mean: m,
                            stddev: var.sqrt().max(STDDEV_FLOOR),
                        })
                    }
                }
                AttributeKind::Nominal => {
                    let v = spec.nominal_values.len();
                    let mut counts = vec![0usize; v];
                    for i in &members {
                        counts[i.values[spec.index].as_cat().expect("imputed nominal")] += 1;
                    }
                    let denom = members.len() as f64 + v as f64;
                    AttributeLikelihood::Categorical(
                        counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect(),
                    )
                }
            };
            row.push(lik);
        }
        likelihoods.push(row);
    }

    Ok(NaiveBayesModel {
        schema_fingerprint: dataset.schema_fingerprint(),
        class_labels: labels,
        priors,
        likelihoods,
        class_index: dataset.class_index,
    })
}

/// Posterior class probabilities for one instance.
pub fn posterior(model: &NaiveBayesModel, instance: &Instance) -> Result<Prediction> {
    let n_classes = model.priors.len();
    let mut log_scores = Vec::with_capacity(n_classes);
    for class in 0..n_classes {
        let mut score = model.priors[class].ln();
        for (col, lik) in model.likelihoods[class].iter().enumerate() {
            if col == model.class_index {
                continue;
            }
            let cell = &instance.values[col];
            if cell.is_missing() {
                return Err(Error::Validation(
                    "missing value in instance; impute before scoring".into(),
                ));
            }
            match lik {
                AttributeLikelihood::Gaussian(g) => {
                    let x = cell
                        .as_num()
                        .ok_or_else(|| Error::Validation("expected a numeric cell".into()))?;
                    let ld = g.log_density(x);
                    if !ld.is_finite() {
                        return Err(Error::Eval(format!(
                            "non-finite density for value {x} (mean {}, stddev {})",
                            g.mean, g.stddev
                        )));
                    }
                    score += ld;
                }
                AttributeLikelihood::Categorical(probs) => {
                    let c = cell
                        .as_cat()
                        .ok_or_else(|| Error::Validation("expected a nominal cell".into()))?;
                    // Laplace smoothing keeps every category strictly positive.
                    score += probs[c].ln();
                }
                AttributeLikelihood::Absent => {}
            }
        }
        log_scores.push(score);
    }

    let max = log_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probabilities: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = probabilities.iter().sum();
    for p in &mut probabilities {
        *p /= z;
    }
    let mut predicted = 0;
    for (i, &p) in probabilities.iter().enumerate() {
        if p > probabilities[predicted] {
            predicted = i;
        }
    }
    Ok(Prediction {
        probabilities,
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_csv, ParseOptions, Value};

    fn load(text: &str) -> Dataset {
        parse_csv(text, &ParseOptions::default()).unwrap()
    }

    #[test]
    fn priors_use_add_one_smoothing() {
        // counts (2, 1), N=3, C=2: priors (3/5, 2/5)
        let d = load("x,cls\n1,p\n2,p\n3,n\n");
        let m = fit_nb(&d).unwrap();
        assert!((m.priors[0] - 0.6).abs() < 1e-12);
        assert!((m.priors[1] - 0.4).abs() < 1e-12);
        let sum: f64 = m.priors.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pima_shaped_priors_match_arithmetic() {
        // counts (500, 268) -> (501/770, 269/770)
        let mut rows = String::from("x,cls\n");
        for i in 0..500 {
            rows.push_str(&format!("{i},neg\n"));
        }
        for i in 0..268 {
            rows.push_str(&format!("{i},pos\n"));
        }
        let m = fit_nb(&load(&rows)).unwrap();
        assert!((m.priors[0] - 0.6506493506493507).abs() < 1e-12);
        assert!((m.priors[1] - 0.34935064935064936).abs() < 1e-12);
    }

    #[test]
    fn balanced_two_row_dataset_has_uniform_priors() {
        let d = load("x,cls\n1,p\n2,n\n");
        let m = fit_nb(&d).unwrap();
        assert_eq!(m.priors, vec![0.5, 0.5]);
    }

    #[test]
    fn single_member_class_gets_floored_stddev() {
        let d = load("x,cls\n1,p\n5,n\n6,n\n");
        let m = fit_nb(&d).unwrap();
        match &m.likelihoods[0][0] {
            AttributeLikelihood::Gaussian(g) => assert_eq!(g.stddev, STDDEV_FLOOR),
            other => panic!("expected gaussian, got {other:?}"),
        }
    }

    #[test]
    fn nominal_rows_sum_to_one() {
        let d = load("c,cls\nu,p\nv,p\nu,n\nw,n\nw,n\n");
        let m = fit_nb(&d).unwrap();
        for row in &m.likelihoods {
            if let AttributeLikelihood::Categorical(probs) = &row[0] {
                let s: f64 = probs.iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(probs.iter().all(|&p| p > 0.0));
            }
        }
    }

    #[test]
    fn symmetric_model_gives_even_posterior() {
        // identical likelihood params and priors for both classes
        let d = load("x,cls\n1,p\n2,p\n1,n\n2,n\n");
        let m = fit_nb(&d).unwrap();
        let inst = Instance::new(vec![Value::Num(1.7), Value::Cat(0)]);
        let p = posterior(&m, &inst).unwrap();
        assert!((p.probabilities[0] - 0.5).abs() < 1e-12);
        assert_eq!(p.predicted, 0); // tie resolves to the lowest label index
    }

    #[test]
    fn midpoint_between_two_gaussians_is_even() {
        // class means 0 and 1, shared stddev, equal priors; x = 0.5 sits at
        // the symmetry point.
        let mut m = fit_nb(&load("x,cls\n0,a\n0,a\n1,b\n1,b\n")).unwrap();
        m.likelihoods[0][0] = AttributeLikelihood::Gaussian(GaussianParams { mean: 0.0, stddev: 0.3 });
        m.likelihoods[1][0] = AttributeLikelihood::Gaussian(GaussianParams { mean: 1.0, stddev: 0.3 });
        let even = posterior(&m, &Instance::new(vec![Value::Num(0.5), Value::Cat(0)])).unwrap();
        assert!((even.probabilities[0] - 0.5).abs() < 1e-12);

        // x = 0: direct evaluation of the two densities as an oracle
        let density = |x: f64, mean: f64, sd: f64| {
            (-((x - mean) * (x - mean)) / (2.0 * sd * sd)).exp()
                / (sd * (2.0 * std::f64::consts::PI).sqrt())
        };
        let da = density(0.0, 0.0, 0.3) * 0.5;
        let db = density(0.0, 1.0, 0.3) * 0.5;
        let expect_a = da / (da + db);
        let p = posterior(&m, &Instance::new(vec![Value::Num(0.0), Value::Cat(0)])).unwrap();
        assert!(p.probabilities[0] > p.probabilities[1]);
        assert!((p.probabilities[0] - expect_a).abs() < 1e-12);
    }

    #[test]
    fn posterior_probabilities_normalize() {
        let d = load("x,y,cls\n1,u,p\n2,v,p\n3,u,n\n4,v,n\n5,u,p\n");
        let m = fit_nb(&d).unwrap();
        for inst in &d.instances {
            let p = posterior(&m, inst).unwrap();
            let s: f64 = p.probabilities.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_is_order_invariant() {
        let d1 = load("x,y,cls\n1,u,p\n2,v,p\n3,u,n\n4,v,n\n");
        let d2 = load("x,y,cls\n4,v,n\n2,v,p\n3,u,n\n1,u,p\n");
        // same labels discovered in a different order; align by re-parsing
        // with pinned order
        let opts = ParseOptions {
            label_order: Some(vec!["p".into(), "n".into()]),
            ..Default::default()
        };
        let d1 = parse_csv(&d1.to_csv(), &opts).unwrap();
        let d2 = parse_csv(&d2.to_csv(), &opts).unwrap();
        let m1 = fit_nb(&d1).unwrap();
        let m2 = fit_nb(&d2).unwrap();
        assert_eq!(m1.priors, m2.priors);
        assert_eq!(m1.likelihoods, m2.likelihoods);
    }

    #[test]
    fn deterministic_nominal_attribute_reaches_full_training_accuracy() {
        let d = load("f,x,cls\nu,1,p\nu,2,p\nu,3,p\nv,1,n\nv,2,n\nv,3,n\n");
        let m = fit_nb(&d).unwrap();
        let correct = d
            .instances
            .iter()
            .filter(|i| posterior(&m, i).unwrap().predicted == d.class_of(i))
            .count();
        assert_eq!(correct, d.len());
    }

    #[test]
    fn log_shift_does_not_change_argmax() {
        // multiplying all unnormalized scores by a constant = adding a
        // constant in log space; the prediction must be invariant
        let d = load("x,cls\n1,p\n2,p\n8,n\n9,n\n");
        let m = fit_nb(&d).unwrap();
        let inst = Instance::new(vec![Value::Num(1.4), Value::Cat(0)]);
        let base = posterior(&m, &inst).unwrap();
        let mut scaled = m.clone();
        // scale both priors by 3: normalization removes the factor
        scaled.priors = m.priors.iter().map(|p| p * 3.0).collect();
        let shifted = posterior(&scaled, &inst).unwrap();
        assert_eq!(base.predicted, shifted.predicted);
        for (a, b) in base.probabilities.iter().zip(&shifted.probabilities) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_dataset_is_a_fit_error() {
        let mut d = load("x,cls\n1,p\n");
        d.instances.clear();
        assert!(fit_nb(&d).is_err());
    }
}
