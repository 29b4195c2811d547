//! Command line front end for the classmine toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use classmine::dataset::{class_distribution, parse_csv, ClassColumn, Dataset, ParseOptions};
use classmine::error::{Error, Result};
use classmine::eval::{evaluate, Protocol};
use classmine::feature_select::best_first_select;
use classmine::model::{Learner, ModelSpec};
use classmine::pipeline::{run_pipeline, PipelineConfig};
use classmine::preprocess::{
    apply_impute, apply_normalize, descriptive_stats, fit_impute, fit_normalize, StdDevMode,
};
use classmine::report::{render_report, ReportStyle};
use classmine::tree::{SplitCriterion, TreeParams};

/// Environment variable holding a directory that relative `--data` paths are
/// resolved against.
const DATA_DIR_ENV: &str = "CLASSMINE_DATA_DIR";

#[derive(Parser)]
#[command(
    name = "classmine",
    version,
    about = "Classification mining on UCI-style CSV datasets: preprocessing, CFS feature selection, decision trees, naive Bayes and a reproducible evaluation harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Input CSV file (header row required). Relative paths are resolved
    /// against $CLASSMINE_DATA_DIR when it is set.
    #[arg(long)]
    data: PathBuf,
    /// Class column header name, or "last".
    #[arg(long, default_value = "last")]
    class_column: String,
    /// Comma-separated pinned class label order, or "discovery".
    #[arg(long)]
    label_order: Option<String>,
    /// Class label rewrite FROM=TO (repeatable), e.g. 1=tested_positive.
    #[arg(long = "class-alias", value_name = "FROM=TO")]
    class_aliases: Vec<String>,
    /// Numeric columns (comma-separated) whose zeros count as missing.
    #[arg(long, value_delimiter = ',')]
    zeros_as_missing: Vec<String>,
}

#[derive(Args, Clone)]
struct AlgoArgs {
    /// Algorithm to train: j48 or nb.
    #[arg(long, default_value = "j48")]
    algo: String,
    /// J48: minimum instances per leaf.
    #[arg(long, default_value_t = 2)]
    min_leaf: usize,
    /// J48: pruning confidence factor in (0, 1).
    #[arg(long, default_value_t = 0.25)]
    confidence: f64,
    /// J48: disable pruning.
    #[arg(long)]
    no_prune: bool,
    /// J48: split on raw information gain instead of gain ratio.
    #[arg(long)]
    info_gain: bool,
}

impl AlgoArgs {
    fn model_spec(&self) -> Result<ModelSpec> {
        match self.algo.as_str() {
            "j48" => Ok(ModelSpec::J48 {
                params: TreeParams {
                    min_leaf_instances: self.min_leaf,
                    confidence_factor: self.confidence,
                    prune: !self.no_prune,
                    criterion: if self.info_gain {
                        SplitCriterion::InfoGain
                    } else {
                        SplitCriterion::GainRatio
                    },
                },
            }),
            "nb" => Ok(ModelSpec::NaiveBayes),
            other => Err(Error::Validation(format!(
                "unknown algorithm '{other}' (expected j48 or nb)"
            ))),
        }
    }
}

#[derive(Args, Clone)]
struct ProtocolArgs {
    /// Evaluation protocol: cv or split.
    #[arg(long, default_value = "cv")]
    protocol: String,
    /// cv: number of folds.
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// split: training percentage.
    #[arg(long, default_value_t = 70.0)]
    train_pct: f64,
    /// Shuffling seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ProtocolArgs {
    fn protocol(&self) -> Result<Protocol> {
        match self.protocol.as_str() {
            "cv" => Ok(Protocol::CrossValidation {
                folds: self.folds,
                seed: self.seed,
            }),
            "split" => Ok(Protocol::PercentageSplit {
                train_pct: self.train_pct,
                seed: self.seed,
            }),
            other => Err(Error::Validation(format!(
                "unknown protocol '{other}' (expected cv or split)"
            ))),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Impute missing values and normalize; write the transformed CSV plus a
    /// JSON sidecar with the fitted parameters and descriptive statistics.
    Prep {
        #[command(flatten)]
        data: DataArgs,
        /// Transformed CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fitted-parameters/statistics sidecar path.
        #[arg(long)]
        params_out: Option<PathBuf>,
        /// Skip imputation.
        #[arg(long)]
        no_impute: bool,
        /// Skip normalization.
        #[arg(long)]
        no_normalize: bool,
    },
    /// Run CFS feature selection; print the chosen attributes and merit and
    /// optionally write the reduced CSV.
    Select {
        #[command(flatten)]
        data: DataArgs,
        /// Reduced CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the locally-predictive re-admission pass.
        #[arg(long)]
        no_locally_predictive: bool,
        /// Non-improving expansions before the search stops.
        #[arg(long, default_value_t = 5)]
        stale_limit: usize,
    },
    /// Train a model on the full dataset and dump it.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        /// Model JSON output path.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Evaluate a model on the dataset as-is (no preprocessing).
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Report style: text, json or csv.
        #[arg(long, default_value = "text")]
        style: String,
    },
    /// Run the full pipeline: load, impute, normalize, select, train,
    /// evaluate, report.
    Run {
        /// Optional JSON config file; explicit flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Skip imputation.
        #[arg(long)]
        no_impute: bool,
        /// Skip normalization.
        #[arg(long)]
        no_normalize: bool,
        /// Skip feature selection.
        #[arg(long)]
        no_select: bool,
        /// Refit preprocessing and selection inside each fold/split.
        #[arg(long)]
        leak_free: bool,
        /// Report JSON output path.
        #[arg(long)]
        out_json: Option<PathBuf>,
        /// Report text output path.
        #[arg(long)]
        out_text: Option<PathBuf>,
        /// Run manifest output path.
        #[arg(long)]
        out_manifest: Option<PathBuf>,
    },
    /// Print descriptive statistics and the class distribution.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        /// Use the population (n) standard deviation instead of sample (n-1).
        #[arg(long)]
        population_stddev: bool,
    },
}

fn resolve_data_path(path: &std::path::Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
            let candidate = PathBuf::from(dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn parse_label_order(raw: &Option<String>) -> Option<Vec<String>> {
    match raw.as_deref() {
        None | Some("discovery") => None,
        Some(csv) => Some(csv.split(',').map(|s| s.trim().to_string()).collect()),
    }
}

fn parse_aliases(raw: &[String]) -> Result<Vec<(String, String)>> {
    raw.iter()
        .map(|pair| {
            pair.split_once('=')
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .ok_or_else(|| {
                    Error::Validation(format!("class alias '{pair}' is not FROM=TO"))
                })
        })
        .collect()
}

impl DataArgs {
    fn parse_options(&self) -> Result<ParseOptions> {
        Ok(ParseOptions {
            class_column: if self.class_column == "last" {
                ClassColumn::Last
            } else {
                ClassColumn::Named(self.class_column.clone())
            },
            label_order: parse_label_order(&self.label_order),
            class_aliases: parse_aliases(&self.class_aliases)?,
            zeros_as_missing: self.zeros_as_missing.clone(),
        })
    }

    fn load(&self) -> Result<Dataset> {
        let path = resolve_data_path(&self.data);
        let text = std::fs::read_to_string(&path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        parse_csv(&text, &self.parse_options()?)
    }
}

fn write_file(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn cmd_prep(
    data: &DataArgs,
    out: Option<&PathBuf>,
    params_out: Option<&PathBuf>,
    no_impute: bool,
    no_normalize: bool,
) -> Result<()> {
    let mut d = data.load()?;
    let mut impute_params = None;
    let mut norm_params = None;
    if !no_impute {
        let p = fit_impute(&d)?;
        d = apply_impute(&p, &d)?;
        impute_params = Some(p);
    }
    if !no_normalize {
        let p = fit_normalize(&d)?;
        d = apply_normalize(&p, &d)?;
        norm_params = Some(p);
    }
    let stats = descriptive_stats(&d, StdDevMode::Sample);
    if let Some(path) = out {
        write_file(path, &d.to_csv())?;
        println!("wrote transformed CSV to {}", path.display());
    }
    if let Some(path) = params_out {
        let sidecar = serde_json::json!({
            "imputation": impute_params,
            "normalization": norm_params,
            "statistics": stats,
        });
        write_file(path, &serde_json::to_string_pretty(&sidecar)?)?;
        println!("wrote fitted parameters to {}", path.display());
    }
    print_stats_table(&stats);
    Ok(())
}

fn cmd_select(
    data: &DataArgs,
    out: Option<&PathBuf>,
    no_locally_predictive: bool,
    stale_limit: usize,
) -> Result<()> {
    let mut d = data.load()?;
    // selection needs complete, comparable columns
    let p = fit_impute(&d)?;
    d = apply_impute(&p, &d)?;
    let subset = best_first_select(
        &d,
        &classmine::feature_select::SelectParams {
            stale_limit,
            locally_predictive: !no_locally_predictive,
        },
    )?;
    println!("selected attributes (merit {:.4}):", subset.merit);
    for &i in &subset.members {
        println!("  {}", d.schema[i].name);
    }
    if let Some(path) = out {
        let reduced = d.select_columns(&subset.members)?;
        write_file(path, &reduced.to_csv())?;
        println!("wrote reduced CSV to {}", path.display());
    }
    Ok(())
}

fn cmd_train(data: &DataArgs, algo: &AlgoArgs, model_out: Option<&PathBuf>) -> Result<()> {
    let d = data.load()?;
    let spec = algo.model_spec()?;
    let model = spec.fit_model(&d)?;
    if let classmine::model::Model::Tree(tree) = &model {
        println!("{}", tree.to_text());
        println!(
            "nodes: {}, leaves: {}, depth: {}",
            tree.node_count(),
            tree.root.leaf_count(),
            tree.root.depth()
        );
    } else {
        println!("fitted {}", spec.describe());
    }
    if let Some(path) = model_out {
        write_file(path, &model.to_json()?)?;
        println!("wrote model to {}", path.display());
    }
    Ok(())
}

fn cmd_eval(data: &DataArgs, algo: &AlgoArgs, protocol: &ProtocolArgs, style: &str) -> Result<()> {
    let d = data.load()?;
    let spec = algo.model_spec()?;
    let proto = protocol.protocol()?;
    let report = evaluate(&spec, &d, &proto)?;
    let style = match style {
        "text" => ReportStyle::Text,
        "json" => ReportStyle::Json,
        "csv" => ReportStyle::Csv,
        other => {
            return Err(Error::Validation(format!(
                "unknown report style '{other}' (expected text, json or csv)"
            )))
        }
    };
    print!("{}", render_report(&report, style)?);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    config: Option<&PathBuf>,
    data: &DataArgs,
    algo: &AlgoArgs,
    protocol: &ProtocolArgs,
    no_impute: bool,
    no_normalize: bool,
    no_select: bool,
    leak_free: bool,
    out_json: Option<&PathBuf>,
    out_text: Option<&PathBuf>,
    out_manifest: Option<&PathBuf>,
) -> Result<()> {
    let mut cfg: PipelineConfig = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", path.display()),
                ))
            })?;
            serde_json::from_str(&text)?
        }
        None => PipelineConfig::default(),
    };

    // flags win over the config file
    cfg.data_path = resolve_data_path(&data.data);
    cfg.class_column = data.class_column.clone();
    if data.label_order.is_some() {
        cfg.label_order = parse_label_order(&data.label_order);
    }
    if !data.class_aliases.is_empty() {
        cfg.class_aliases = parse_aliases(&data.class_aliases)?;
    }
    if !data.zeros_as_missing.is_empty() {
        cfg.zeros_as_missing = data.zeros_as_missing.clone();
    }
    cfg.model = algo.model_spec()?;
    cfg.protocol = protocol.protocol()?;
    if no_impute {
        cfg.impute = false;
    }
    if no_normalize {
        cfg.normalize = false;
    }
    if no_select {
        cfg.feature_selection = false;
    }
    if leak_free {
        cfg.leak_free = true;
    }
    cfg.out_json = out_json.cloned();
    cfg.out_text = out_text.cloned();
    cfg.out_manifest = out_manifest.cloned();

    let (report, manifest) = run_pipeline(&cfg)?;
    if let Some(names) = &manifest.selected_features {
        println!("selected features: {}", names.join(", "));
    }
    print!("{}", render_report(&report, ReportStyle::Text)?);
    println!("dataset sha256: {}", manifest.dataset_sha256);
    Ok(())
}

fn print_stats_table(stats: &classmine::preprocess::AttributeStats) {
    println!();
    println!(
        "{:<12} {:>10} {:>10} {:>10} {:>12}",
        "attribute", "min", "max", "mean", "stddev"
    );
    for row in &stats.rows {
        println!(
            "{:<12} {:>10.3} {:>10.3} {:>10.3} {:>12.3}",
            row.name, row.min, row.max, row.mean, row.stddev
        );
    }
}

fn cmd_stats(data: &DataArgs, population: bool) -> Result<()> {
    let d = data.load()?;
    let mode = if population {
        StdDevMode::Population
    } else {
        StdDevMode::Sample
    };
    print_stats_table(&descriptive_stats(&d, mode));

    let dist = class_distribution(&d);
    println!();
    println!("class distribution ({} instances):", dist.total);
    let max_count = dist.counts.iter().copied().max().unwrap_or(1).max(1);
    let widest = dist.labels.iter().map(String::len).max().unwrap_or(0);
    for (label, &count) in dist.labels.iter().zip(&dist.counts) {
        let pct = 100.0 * count as f64 / dist.total.max(1) as f64;
        let bar = "#".repeat((count * 40).div_ceil(max_count));
        println!("  {label:<widest$} {count:>6} ({pct:>5.1} %) {bar}");
    }
    Ok(())
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Prep {
            data,
            out,
            params_out,
            no_impute,
            no_normalize,
        } => cmd_prep(data, out.as_ref(), params_out.as_ref(), *no_impute, *no_normalize),
        Command::Select {
            data,
            out,
            no_locally_predictive,
            stale_limit,
        } => cmd_select(data, out.as_ref(), *no_locally_predictive, *stale_limit),
        Command::Train { data, algo, model_out } => cmd_train(data, algo, model_out.as_ref()),
        Command::Eval {
            data,
            algo,
            protocol,
            style,
        } => cmd_eval(data, algo, protocol, style),
        Command::Run {
            config,
            data,
            algo,
            protocol,
            no_impute,
            no_normalize,
            no_select,
            leak_free,
            out_json,
            out_text,
            out_manifest,
        } => cmd_run(
            config.as_ref(),
            data,
            algo,
            protocol,
            *no_impute,
            *no_normalize,
            *no_select,
            *leak_free,
            out_json.as_ref(),
            out_text.as_ref(),
            out_manifest.as_ref(),
        ),
        Command::Stats {
            data,
            population_stddev,
        } => cmd_stats(data, *population_stddev),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
