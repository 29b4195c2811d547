//! End-to-end experiment pipeline: load, impute, normalize, select features,
//! train and evaluate, then write artifacts.
//!
//! The default configuration fits the preprocessing filters and the feature
//! selector once, on the full dataset, before any train/test split — the
//! classic single-pass tool behaviour. A leak-free mode instead refits every
//! stage inside each training fold or split.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{parse_csv, ClassColumn, Dataset, Instance, ParseOptions};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvaluationReport, Protocol};
use crate::feature_select::{best_first_select, FeatureSubset, SelectParams};
use crate::model::{Fitted, Learner, Model, ModelSpec, Prediction};
use crate::preprocess::{
    apply_impute, apply_normalize, fit_impute, fit_normalize, impute_instance,
    normalize_instance, ImputationParams, NormalizationParams,
};
use crate::report::{render_report, ReportStyle};

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub data_path: PathBuf,
    /// Header name of the class column, or "last".
    pub class_column: String,
    /// Pinned class label order; `None` keeps file-discovery order.
    pub label_order: Option<Vec<String>>,
    /// Raw-to-label rewrites for the class column (e.g. "1" -> "tested_positive").
    pub class_aliases: Vec<(String, String)>,
    /// Numeric columns whose zeros are reinterpreted as missing.
    pub zeros_as_missing: Vec<String>,
    pub impute: bool,
    pub normalize: bool,
    pub feature_selection: bool,
    pub select_params: SelectParams,
    /// Refit filters and selection inside each fold/split instead of once up
    /// front.
    pub leak_free: bool,
    pub model: ModelSpec,
    pub protocol: Protocol,
    pub out_json: Option<PathBuf>,
    pub out_text: Option<PathBuf>,
    pub out_manifest: Option<PathBuf>,
}

impl Default for PipelineConfig {
    /// The reference setup: impute + normalize + CFS, label order pinned to
    /// `[tested_positive, tested_negative]`, J48, 10-fold CV, seed 1.
    fn default() -> Self {
        PipelineConfig {
            data_path: PathBuf::new(),
            class_column: "last".into(),
            label_order: Some(vec![
                "tested_positive".to_string(),
                "tested_negative".to_string(),
            ]),
            class_aliases: vec![
                ("1".to_string(), "tested_positive".to_string()),
                ("0".to_string(), "tested_negative".to_string()),
            ],
            zeros_as_missing: Vec::new(),
            impute: true,
            normalize: true,
            feature_selection: true,
            select_params: SelectParams::default(),
            leak_free: false,
            model: ModelSpec::j48_default(),
            protocol: Protocol::CrossValidation { folds: 10, seed: 1 },
            out_json: None,
            out_text: None,
            out_manifest: None,
        }
    }
}

impl PipelineConfig {
    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            class_column: if self.class_column == "last" {
                ClassColumn::Last
            } else {
                ClassColumn::Named(self.class_column.clone())
            },
            label_order: self.label_order.clone(),
            class_aliases: self.class_aliases.clone(),
            zeros_as_missing: self.zeros_as_missing.clone(),
        }
    }
}

/// Wall-clock duration of one pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: u128,
}

/// Reproducibility record written alongside the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config: PipelineConfig,
    /// SHA-256 of the loaded data file bytes.
    pub dataset_sha256: String,
    /// Selected attribute names (absent in leak-free mode, where selection is
    /// refitted per fold).
    pub selected_features: Option<Vec<String>>,
    pub selected_merit: Option<f64>,
    pub stage_timings: Vec<StageTiming>,
}

/// Read and checksum the data file; a `<path>.sha256` sidecar, when present,
/// pins the expected bytes and a mismatch aborts the run.
pub fn load_data(cfg: &PipelineConfig) -> Result<(Dataset, String)> {
    let path = &cfg.data_path;
    let bytes = std::fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut checksum = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write as _;
        let _ = write!(checksum, "{b:02x}");
    }

    let sidecar = sidecar_path(path);
    if let Ok(expected) = std::fs::read_to_string(&sidecar) {
        let expected = expected.split_whitespace().next().unwrap_or("").to_string();
        if !expected.is_empty() && expected != checksum {
            return Err(Error::Validation(format!(
                "dataset checksum mismatch: {} pins {expected}, file hashes to {checksum}",
                sidecar.display()
            )));
        }
    }

    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Validation(format!("{} is not UTF-8: {e}", path.display())))?;
    let dataset = parse_csv(&text, &cfg.parse_options())?;
    Ok((dataset, checksum))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".sha256");
    PathBuf::from(os)
}

/// Learner that refits imputation, normalization and feature selection on
/// every training set it is given (the leak-free mode).
pub struct StagedLearner {
    pub impute: bool,
    pub normalize: bool,
    pub feature_selection: bool,
    pub select_params: SelectParams,
    pub model: ModelSpec,
}

struct StagedModel {
    impute_params: Option<ImputationParams>,
    norm_params: Option<NormalizationParams>,
    /// Column projection applied after filtering (selected members + class).
    column_order: Option<Vec<usize>>,
    model: Model,
}

impl Learner for StagedLearner {
    fn fit(&self, train: &Dataset) -> Result<Box<dyn Fitted>> {
        let mut work = train.clone();
        let impute_params = if self.impute {
            let p = fit_impute(&work)?;
            work = apply_impute(&p, &work)?;
            Some(p)
        } else {
            None
        };
        let norm_params = if self.normalize {
            let p = fit_normalize(&work)?;
            work = apply_normalize(&p, &work)?;
            Some(p)
        } else {
            None
        };
        let column_order = if self.feature_selection {
            let subset = best_first_select(&work, &self.select_params)?;
            let mut order = subset.members.clone();
            order.sort_unstable();
            order.push(work.class_index);
            work = work.select_columns(&subset.members)?;
            Some(order)
        } else {
            None
        };
        let model = self.model.fit_model(&work)?;
        Ok(Box::new(StagedModel {
            impute_params,
            norm_params,
            column_order,
            model,
        }))
    }

    fn describe(&self) -> String {
        format!("leak_free({})", self.model.describe())
    }
}

impl Fitted for StagedModel {
    fn predict(&self, instance: &Instance) -> Result<Prediction> {
        let mut inst = instance.clone();
        if let Some(p) = &self.impute_params {
            impute_instance(p, &mut inst);
        }
        if let Some(p) = &self.norm_params {
            normalize_instance(p, &mut inst);
        }
        if let Some(order) = &self.column_order {
            inst = Instance::new(order.iter().map(|&i| inst.values[i]).collect());
        }
        self.model.predict(&inst)
    }
}

/// Removes the files it tracked unless disarmed, so a failing run leaves no
/// partial artifacts behind.
struct ArtifactGuard {
    written: Vec<PathBuf>,
    armed: bool,
}

impl ArtifactGuard {
    fn new() -> Self {
        ArtifactGuard {
            written: Vec::new(),
            armed: true,
        }
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        std::fs::write(path, contents).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    fn disarm(&mut self) {
        self.armed = false;
    }
}

impl Drop for ArtifactGuard {
    fn drop(&mut self) {
        if self.armed {
            for path in &self.written {
                let _ = std::fs::remove_file(path);
            }
        }
    }
}

/// Execute the full pipeline in stage order: load, impute, normalize,
/// select, evaluate, report. On failure the error carries the stage name and
/// any partially written artifacts are removed.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<(EvaluationReport, RunManifest)> {
    let mut timings: Vec<StageTiming> = Vec::new();
    let mut timed = |stage: &str, start: Instant| {
        timings.push(StageTiming {
            stage: stage.to_string(),
            millis: start.elapsed().as_millis(),
        });
    };

    let start = Instant::now();
    let (mut data, checksum) = load_data(cfg).map_err(|e| e.in_stage("load"))?;
    timed("load", start);

    let mut selected: Option<FeatureSubset> = None;
    let mut selected_names: Option<Vec<String>> = None;

    if !cfg.leak_free {
        if cfg.impute {
            let start = Instant::now();
            let params = fit_impute(&data).map_err(|e| e.in_stage("impute"))?;
            data = apply_impute(&params, &data).map_err(|e| e.in_stage("impute"))?;
            timed("impute", start);
        }
        if cfg.normalize {
            let start = Instant::now();
            let params = fit_normalize(&data).map_err(|e| e.in_stage("normalize"))?;
            data = apply_normalize(&params, &data).map_err(|e| e.in_stage("normalize"))?;
            timed("normalize", start);
        }
        if cfg.feature_selection {
            let start = Instant::now();
            let subset =
                best_first_select(&data, &cfg.select_params).map_err(|e| e.in_stage("select"))?;
            selected_names = Some(
                subset
                    .members
                    .iter()
                    .map(|&i| data.schema[i].name.clone())
                    .collect(),
            );
            data = data
                .select_columns(&subset.members)
                .map_err(|e| e.in_stage("select"))?;
            selected = Some(subset);
            timed("select", start);
        }
    }

    let start = Instant::now();
    let report = if cfg.leak_free {
        let learner = StagedLearner {
            impute: cfg.impute,
            normalize: cfg.normalize,
            feature_selection: cfg.feature_selection,
            select_params: cfg.select_params.clone(),
            model: cfg.model.clone(),
        };
        evaluate(&learner, &data, &cfg.protocol)
    } else {
        evaluate(&cfg.model, &data, &cfg.protocol)
    }
    .map_err(|e| e.in_stage("evaluate"))?;
    timed("evaluate", start);

    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        dataset_sha256: checksum,
        selected_features: selected_names,
        selected_merit: selected.as_ref().map(|s| s.merit),
        stage_timings: timings,
    };

    let start = Instant::now();
    let mut guard = ArtifactGuard::new();
    let write_all = |guard: &mut ArtifactGuard| -> Result<()> {
        if let Some(path) = &cfg.out_json {
            guard.write(path, &render_report(&report, ReportStyle::Json)?)?;
        }
        if let Some(path) = &cfg.out_text {
            guard.write(path, &render_report(&report, ReportStyle::Text)?)?;
        }
        if let Some(path) = &cfg.out_manifest {
            guard.write(path, &serde_json::to_string_pretty(&manifest)?)?;
        }
        Ok(())
    };
    write_all(&mut guard).map_err(|e| e.in_stage("report"))?;
    guard.disarm();
    let mut timings = manifest.stage_timings.clone();
    timings.push(StageTiming {
        stage: "report".to_string(),
        millis: start.elapsed().as_millis(),
    });
    let manifest = RunManifest {
        stage_timings: timings,
        ..manifest
    };

    Ok((report, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pima_path() -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/pima.csv")
    }

    fn base_config() -> PipelineConfig {
        PipelineConfig {
            data_path: pima_path(),
            ..Default::default()
        }
    }

    #[test]
    fn missing_data_file_maps_to_io_exit_code() {
        let cfg = PipelineConfig {
            data_path: PathBuf::from("/no/such/file.csv"),
            ..Default::default()
        };
        let err = run_pipeline(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/no/such/file.csv"));
        assert!(err.to_string().contains("load"));
    }

    #[test]
    fn reference_run_matches_published_shape() {
        let (report, manifest) = run_pipeline(&base_config()).unwrap();
        assert_eq!(report.matrix.total(), 768);
        assert_eq!(report.matrix.row_sums(), vec![268, 500]);
        assert_eq!(
            manifest.selected_features.as_deref(),
            Some(&["plas".to_string(), "mass".to_string(), "pedi".to_string(), "age".to_string()][..])
        );
    }

    #[test]
    fn identical_runs_produce_byte_identical_reports() {
        let cfg = base_config();
        let (r1, _) = run_pipeline(&cfg).unwrap();
        let (r2, _) = run_pipeline(&cfg).unwrap();
        let j1 = render_report(&r1, ReportStyle::Json).unwrap();
        let j2 = render_report(&r2, ReportStyle::Json).unwrap();
        assert_eq!(j1, j2);
    }

    #[test]
    fn disabling_selection_changes_only_features_and_metrics() {
        let with = run_pipeline(&base_config()).unwrap();
        let without = run_pipeline(&PipelineConfig {
            feature_selection: false,
            ..base_config()
        })
        .unwrap();
        assert!(with.1.selected_features.is_some());
        assert!(without.1.selected_features.is_none());
        // same protocol and totals, same report schema
        assert_eq!(with.0.protocol, without.0.protocol);
        assert_eq!(with.0.matrix.total(), without.0.matrix.total());
    }

    #[test]
    fn failed_report_stage_removes_partial_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("report.json");
        let bad = dir.path().join("missing-dir/report.txt");
        let cfg = PipelineConfig {
            out_json: Some(good.clone()),
            out_text: Some(bad),
            ..base_config()
        };
        let err = run_pipeline(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(!good.exists(), "partial artifact should have been removed");
    }

    #[test]
    fn checksum_sidecar_mismatch_aborts() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.csv");
        std::fs::write(&data, "a,cls\n1,x\n2,y\n").unwrap();
        std::fs::write(dir.path().join("d.csv.sha256"), "deadbeef  d.csv\n").unwrap();
        let cfg = PipelineConfig {
            data_path: data,
            label_order: None,
            ..Default::default()
        };
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(err.to_string().contains("checksum mismatch"), "{err}");
    }

    #[test]
    fn leak_free_mode_runs_end_to_end() {
        let cfg = PipelineConfig {
            leak_free: true,
            protocol: Protocol::PercentageSplit { train_pct: 70.0, seed: 1 },
            ..base_config()
        };
        let (report, manifest) = run_pipeline(&cfg).unwrap();
        assert_eq!(report.matrix.total(), 230);
        assert!(manifest.selected_features.is_none());
        assert!(report.model.starts_with("leak_free("));
    }
}
