//! Acceptance suite: every criterion below is pinned to a published value or
//! a derived closed form and prints one pass line when it holds.

use std::path::PathBuf;
use std::time::Instant;

use proptest::prelude::*;

use classmine::dataset::{class_distribution, parse_csv, ParseOptions};
use classmine::eval::{
    confusion_matrix, evaluate, kappa, percentage_split, probabilistic_errors, BaselinePredictor,
    ConfusionMatrix, Protocol,
};
use classmine::feature_select::{
    best_first_select, cfs_merit, select_from_cache, symmetric_uncertainty, CorrelationCache,
    SelectParams,
};
use classmine::model::{ModelSpec, Prediction};
use classmine::pipeline::{run_pipeline, PipelineConfig};
use classmine::preprocess::{
    apply_impute, apply_normalize, descriptive_stats, fit_impute, fit_normalize, StdDevMode,
};
use classmine::report::{render_report, ReportStyle};
use classmine::tree::{build_tree, entropy, prune, TreeParams};
use classmine::dataset::Dataset;

fn pima_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/pima.csv")
}

fn reference_options() -> ParseOptions {
    ParseOptions {
        label_order: Some(vec![
            "tested_positive".to_string(),
            "tested_negative".to_string(),
        ]),
        ..Default::default()
    }
}

fn load_pima() -> Dataset {
    let text = std::fs::read_to_string(pima_path()).expect("bundled dataset present");
    parse_csv(&text, &reference_options()).expect("bundled dataset parses")
}

fn load_pima_preprocessed() -> Dataset {
    let d = load_pima();
    let ip = fit_impute(&d).unwrap();
    let d = apply_impute(&ip, &d).unwrap();
    let np = fit_normalize(&d).unwrap();
    apply_normalize(&np, &d).unwrap()
}

fn reference_config() -> PipelineConfig {
    PipelineConfig {
        data_path: pima_path(),
        ..Default::default()
    }
}

fn matrix(counts: [[usize; 2]; 2]) -> ConfusionMatrix {
    ConfusionMatrix {
        labels: vec!["tested_positive".into(), "tested_negative".into()],
        counts: counts.iter().map(|r| r.to_vec()).collect(),
    }
}

#[test]
fn criterion_1_kappa_oracle() {
    let cases = [
        ([[149, 119], [74, 426]], 0.4245),
        ([[48, 24], [29, 129]], 0.4742),
        ([[44, 28], [19, 139]], 0.5081),
    ];
    let start = Instant::now();
    for (counts, expected) in cases {
        let k = kappa(&matrix(counts)).unwrap();
        assert!(
            (k - expected).abs() <= 0.0005,
            "kappa {k} vs published {expected}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_micros() < 1000,
        "kappa oracle took {elapsed:?}, budget is 1 ms"
    );
    println!("ACCEPTANCE 1 PASS: kappa oracle 0.4245 / 0.4742 / 0.5081 within 0.0005 in {elapsed:?}");
}

#[test]
fn criterion_2_accuracy_oracle() {
    let cases = [
        ([[149, 119], [74, 426]], 74.8698),
        ([[48, 24], [29, 129]], 76.9565),
        ([[44, 28], [19, 139]], 79.5652),
    ];
    for (counts, expected) in cases {
        let m = matrix(counts);
        let acc = 100.0 * m.correct() as f64 / m.total() as f64;
        // exact at the published 4-decimal precision
        assert!(
            (acc - expected).abs() < 0.00005,
            "accuracy {acc} vs published {expected}"
        );
    }
    println!("ACCEPTANCE 2 PASS: accuracies recomputed from the published matrices are exact");
}

#[test]
fn criterion_3_split_sizes() {
    let d = load_pima();
    let (train, test) = percentage_split(&d, 70.0, 1).unwrap();
    assert_eq!(train.len(), 538);
    assert_eq!(test.len(), 230);
    println!("ACCEPTANCE 3 PASS: percentage_split(pima, 70) = 538 train / 230 test");
}

#[test]
fn criterion_4_feature_selection() {
    let d = load_pima_preprocessed();
    let subset = best_first_select(&d, &SelectParams::default()).unwrap();
    let names: Vec<&str> = subset
        .members
        .iter()
        .map(|&i| d.schema[i].name.as_str())
        .collect();
    assert_eq!(names, vec!["plas", "mass", "pedi", "age"]);
    println!(
        "ACCEPTANCE 4 PASS: selected exactly {{plas, mass, pedi, age}} (merit {:.4})",
        subset.merit
    );
}

#[test]
fn criterion_5_end_to_end_accuracy() {
    let start = Instant::now();

    let (j48_cv, _) = run_pipeline(&reference_config()).unwrap();
    assert!(
        (j48_cv.accuracy_pct - 74.87).abs() <= 4.0,
        "J48 cv accuracy {} outside 74.87 +/- 4",
        j48_cv.accuracy_pct
    );

    let (j48_split, _) = run_pipeline(&PipelineConfig {
        protocol: Protocol::PercentageSplit {
            train_pct: 70.0,
            seed: 1,
        },
        ..reference_config()
    })
    .unwrap();
    assert!(
        (j48_split.accuracy_pct - 76.96).abs() <= 4.0,
        "J48 split accuracy {} outside 76.96 +/- 4",
        j48_split.accuracy_pct
    );

    let (nb_split, _) = run_pipeline(&PipelineConfig {
        model: ModelSpec::NaiveBayes,
        protocol: Protocol::PercentageSplit {
            train_pct: 70.0,
            seed: 1,
        },
        ..reference_config()
    })
    .unwrap();
    assert!(
        (nb_split.accuracy_pct - 79.57).abs() <= 4.0,
        "NB split accuracy {} outside 79.57 +/- 4",
        nb_split.accuracy_pct
    );

    // published split-protocol error metrics, +/- 0.05 absolute
    assert!((j48_split.mae - 0.3374).abs() <= 0.05, "J48 split MAE {}", j48_split.mae);
    assert!((j48_split.rmse - 0.4029).abs() <= 0.05, "J48 split RMSE {}", j48_split.rmse);
    assert!((nb_split.mae - 0.2884).abs() <= 0.05, "NB split MAE {}", nb_split.mae);
    assert!((nb_split.rmse - 0.381).abs() <= 0.05, "NB split RMSE {}", nb_split.rmse);

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 10,
        "three full pipelines took {elapsed:?}, budget is 10 s"
    );
    println!(
        "ACCEPTANCE 5 PASS: J48 cv {:.4}% (74.87 +/- 4), J48 split {:.4}% (76.96 +/- 4), NB split {:.4}% (79.57 +/- 4) in {elapsed:?}",
        j48_cv.accuracy_pct, j48_split.accuracy_pct, nb_split.accuracy_pct
    );
}

#[test]
fn criterion_6_descriptive_statistics() {
    let d = load_pima_preprocessed();
    let stats = descriptive_stats(&d, StdDevMode::Sample);
    let expected = [
        ("plas", 0.608, 0.161),
        ("mass", 0.477, 0.117),
        ("pedi", 0.168, 0.141),
        ("age", 0.204, 0.196),
    ];
    for (name, mean, stddev) in expected {
        let row = stats.row(name).unwrap();
        assert!(
            (row.mean - mean).abs() <= 0.02,
            "{name} mean {} vs {mean}",
            row.mean
        );
        assert!(
            (row.stddev - stddev).abs() <= 0.02,
            "{name} stddev {} vs {stddev}",
            row.stddev
        );
        assert!(row.min.abs() < 1e-12 && (row.max - 1.0).abs() < 1e-12);
    }
    println!("ACCEPTANCE 6 PASS: normalized means/stddevs match the published table within 0.02");
}

#[test]
fn criterion_8_class_distribution() {
    let d = load_pima();
    let dist = class_distribution(&d);
    assert_eq!(dist.count_of("tested_positive"), Some(268));
    assert_eq!(dist.count_of("tested_negative"), Some(500));
    assert_eq!(dist.total, 768);
    println!("ACCEPTANCE 8 PASS: class distribution is tested_positive 268 / tested_negative 500");
}

// --- criterion 7: property suites -----------------------------------------

proptest! {
    #[test]
    fn criterion_7a_entropy_bounds(counts in proptest::collection::vec(0usize..100, 1..6)) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let h = entropy(&counts).unwrap();
        let c = counts.iter().filter(|&&x| x > 0).count() as f64;
        prop_assert!(h >= -1e-12);
        prop_assert!(h <= c.log2() + 1e-12);
    }

    #[test]
    fn criterion_7c_su_symmetry_and_range(
        pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..60)
    ) {
        let x: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let a = symmetric_uncertainty(&x, &y).unwrap();
        let b = symmetric_uncertainty(&y, &x).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn criterion_7e_probabilistic_errors_match_double_loop(
        rows in proptest::collection::vec((0.01f64..0.99, prop::bool::ANY), 1..40)
    ) {
        let predictions: Vec<Prediction> = rows
            .iter()
            .map(|&(p, _)| Prediction {
                probabilities: vec![p, 1.0 - p],
                predicted: usize::from(p < 0.5),
            })
            .collect();
        let actual: Vec<usize> = rows.iter().map(|&(_, a)| usize::from(a)).collect();
        prop_assume!(actual.iter().any(|&a| a == 0) && actual.iter().any(|&a| a == 1));
        let baseline = BaselinePredictor { priors: vec![0.3, 0.7] };
        let m = probabilistic_errors(&predictions, &actual, &baseline).unwrap();

        // independent double loop
        let c = 2usize;
        let (mut abs, mut sq, mut babs, mut bsq) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for (i, &a) in actual.iter().enumerate() {
            for label in 0..c {
                let t = if label == a { 1.0 } else { 0.0 };
                abs += (predictions[i].probabilities[label] - t).abs();
                sq += (predictions[i].probabilities[label] - t).powi(2);
                babs += (baseline.priors[label] - t).abs();
                bsq += (baseline.priors[label] - t).powi(2);
            }
        }
        let n = actual.len() as f64;
        let mae = abs / (n * 2.0);
        let rmse = (sq / (n * 2.0)).sqrt();
        prop_assert!((m.mae - mae).abs() < 1e-12);
        prop_assert!((m.rmse - rmse).abs() < 1e-12);
        prop_assert!((m.rae_pct - 100.0 * mae / (babs / (n * 2.0))).abs() < 1e-9);
        prop_assert!((m.rrse_pct - 100.0 * rmse / (bsq / (n * 2.0)).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn criterion_7f_prune_never_increases_node_count(
        rows in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, prop::bool::ANY), 8..40)
    ) {
        prop_assume!(rows.iter().any(|r| r.2) && rows.iter().any(|r| !r.2));
        let mut csvtext = String::from("x,y,cls\n");
        for (x, y, c) in &rows {
            csvtext.push_str(&format!("{x},{y},{}\n", if *c { "p" } else { "n" }));
        }
        let d = parse_csv(&csvtext, &ParseOptions::default()).unwrap();
        let unpruned = build_tree(&d, &TreeParams { prune: false, ..Default::default() }).unwrap();
        let pruned = prune(&unpruned, &TreeParams::default());
        prop_assert!(pruned.node_count() <= unpruned.node_count());
    }
}

#[test]
fn criterion_7b_posterior_normalization_on_random_instances() {
    use rand::Rng;
    use rand::SeedableRng;
    let d = load_pima_preprocessed();
    let reduced = {
        let subset = best_first_select(&d, &SelectParams::default()).unwrap();
        d.select_columns(&subset.members).unwrap()
    };
    let model = classmine::bayes::fit_nb(&reduced).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let mut values: Vec<classmine::dataset::Value> = (0..reduced.schema.len() - 1)
            .map(|_| classmine::dataset::Value::Num(rng.gen_range(-0.5..1.5)))
            .collect();
        values.push(classmine::dataset::Value::Cat(0));
        let p =
            classmine::bayes::posterior(&model, &classmine::dataset::Instance::new(values))
                .unwrap();
        let sum: f64 = p.probabilities.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-9, "posterior sums to {sum}");
    }
    println!("ACCEPTANCE 7b PASS: posterior normalization within 1e-9 on 1000 random instances");
}

#[test]
fn criterion_7d_best_first_matches_exhaustive_on_small_datasets() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let no_post = SelectParams {
        locally_predictive: false,
        ..Default::default()
    };
    for round in 0..30 {
        // 6 predictors, 100 instances, random arity-2..4 nominal columns
        let n_features = 6;
        let n_rows = 100;
        let arities: Vec<usize> = (0..n_features).map(|_| rng.gen_range(2..=4)).collect();
        let mut text = String::from("f0,f1,f2,f3,f4,f5,cls\n");
        for _ in 0..n_rows {
            let cells: Vec<String> = arities
                .iter()
                .map(|&a| format!("v{}", rng.gen_range(0..a)))
                .collect();
            let label = if rng.gen_bool(0.5) { "p" } else { "n" };
            text.push_str(&format!("{},{label}\n", cells.join(",")));
        }
        let d = parse_csv(&text, &ParseOptions::default()).unwrap();
        let cache = CorrelationCache::build(&d).unwrap();

        let mut exhaustive_best = 0.0f64;
        let attrs = cache.attribute_indices.clone();
        for mask in 1u32..(1 << attrs.len()) {
            let subset: Vec<usize> = attrs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &a)| a)
                .collect();
            let m = cfs_merit(&subset, &cache).unwrap();
            if m > exhaustive_best {
                exhaustive_best = m;
            }
        }
        let found = select_from_cache(&cache, &no_post).unwrap();
        assert!(
            (found.merit - exhaustive_best).abs() < 1e-12,
            "round {round}: best-first merit {} vs exhaustive {exhaustive_best}",
            found.merit
        );
    }
    println!("ACCEPTANCE 7d PASS: best-first equals exhaustive search on 30 random 6-feature datasets");
}

#[test]
fn criterion_7g_identical_seeds_give_byte_identical_reports() {
    let cfg = reference_config();
    let (r1, _) = run_pipeline(&cfg).unwrap();
    let (r2, _) = run_pipeline(&cfg).unwrap();
    let j1 = render_report(&r1, ReportStyle::Json).unwrap();
    let j2 = render_report(&r2, ReportStyle::Json).unwrap();
    assert_eq!(j1, j2);
    println!("ACCEPTANCE 7g PASS: identical seeds produce byte-identical JSON reports");
}

#[test]
fn baseline_closed_forms_hold_on_pima() {
    // prior-only predictor on the full set: MAE = 2p(1-p), RMSE = sqrt(p(1-p))
    let d = load_pima();
    let baseline = BaselinePredictor::from_dataset(&d);
    let as_preds: Vec<Prediction> = std::iter::repeat(Prediction {
        probabilities: baseline.priors.clone(),
        predicted: 1,
    })
    .take(d.len())
    .collect();
    let actual: Vec<usize> = d.instances.iter().map(|i| d.class_of(i)).collect();
    let m = probabilistic_errors(&as_preds, &actual, &baseline).unwrap();
    let p = 268.0 / 768.0;
    assert!((m.mae - 2.0 * p * (1.0 - p)).abs() < 1e-12);
    assert!((m.mae - 0.4544).abs() < 0.0005);
    assert!((m.rmse - (p * (1.0 - p)).sqrt()).abs() < 1e-12);
    assert!((m.rmse - 0.4766).abs() < 0.0005);
    assert!((m.rae_pct - 100.0).abs() < 1e-9);
    assert!((m.rrse_pct - 100.0).abs() < 1e-9);
    println!("ACCEPTANCE note PASS: prior-baseline closed forms MAE 0.4544 / RMSE 0.4766 hold");
}

#[test]
fn report_consistency_invariants() {
    let d = load_pima_preprocessed();
    let report = evaluate(
        &ModelSpec::j48_default(),
        &d,
        &Protocol::CrossValidation { folds: 10, seed: 1 },
    )
    .unwrap();
    // accuracy and kappa recomputed from the report's own matrix
    let acc = 100.0 * report.matrix.correct() as f64 / report.matrix.total() as f64;
    assert_eq!(acc, report.accuracy_pct);
    assert_eq!(kappa(&report.matrix).unwrap(), report.kappa);
    assert_eq!(report.correct + report.incorrect, report.matrix.total());

    // a matrix rebuilt from pooled labels agrees with itself
    let m = confusion_matrix(
        &report.matrix.labels,
        &[0, 1, 0, 1],
        &[0, 1, 1, 1],
    )
    .unwrap();
    assert_eq!(m.total(), 4);
    println!("ACCEPTANCE note PASS: report self-consistency invariants hold");
}
