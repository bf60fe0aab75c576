//! High-level commands: everything the CLI can do, callable in-process.
//! The CLI binary is a thin argument parser over these functions; all the
//! numeric work lives in the library modules.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimators::EstimatorConfig;
use crate::evaluation::{run_experiment, EvaluationReport};
use crate::io;
use crate::ratings::RatingsMatrix;
use crate::seed;
use crate::similarity::{compute_similarity, Metric};
use crate::simulate::{simulate_clusters, ClusterSpec};

/// Files produced by a `run`.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report_path: PathBuf,
    pub summary_path: PathBuf,
    pub manifest_path: PathBuf,
    pub group_summary_path: Option<PathBuf>,
    pub report: EvaluationReport,
}

/// The manifest captures the effective config, derived mask seeds, recorded
/// failures, and the software version, so any grid cell can be reproduced in
/// isolation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub mask_seeds: Vec<MaskSeed>,
    pub failures: Vec<crate::evaluation::FailureRecord>,
    pub omitted_users: Vec<crate::evaluation::OmittedUser>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskSeed {
    pub sparsity: f64,
    pub iteration: usize,
    pub seed: u64,
}

/// Load the input named by a config and run the full sweep, writing
/// `report.csv`, `summary.csv`, and `manifest.json` (plus
/// `group_summary.csv` when a group column is configured) into the output
/// directory.
pub fn cmd_run(config: &ExperimentConfig) -> Result<RunArtifacts> {
    config.validate()?;
    if !config.input.exists() {
        return Err(Error::Config(format!(
            "input file {} does not exist",
            config.input.display()
        )));
    }

    let tidy = io::read_tidy_csv(&config.input, config.group_column.as_deref())?;
    let scale = match (config.scale_min, config.scale_max) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => None,
        _ => {
            return Err(Error::Config(
                "scale_min and scale_max must be supplied together".into(),
            ))
        }
    };
    let matrix = RatingsMatrix::from_records(&tidy.records, scale)?;

    let groups = if tidy.groups.is_empty() {
        None
    } else {
        Some(tidy.groups.clone())
    };
    let plan = config.to_plan(groups.clone())?;
    let report = run_experiment(&matrix, &plan)?;

    std::fs::create_dir_all(&config.output)?;
    let report_path = config.output.join("report.csv");
    let summary_path = config.output.join("summary.csv");
    let manifest_path = config.output.join("manifest.json");
    io::write_report_csv(&report_path, &report)?;
    io::write_summary_csv(&summary_path, &report.summary()?)?;

    let group_summary_path = match &groups {
        Some(labels) => {
            let rows = crate::evaluation::stratify_report(&report, labels)?;
            let path = config.output.join("group_summary.csv");
            io::write_group_summary_csv(&path, &rows)?;
            Some(path)
        }
        None => None,
    };

    let mask_seeds = plan
        .sparsity_levels
        .iter()
        .flat_map(|&s| {
            (0..plan.n_iterations).map(move |it| MaskSeed {
                sparsity: s,
                iteration: it,
                seed: seed::mask_seed(plan.base_seed, s, it),
            })
        })
        .collect();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        mask_seeds,
        failures: report.failures.clone(),
        omitted_users: report.omitted.clone(),
    };
    io::write_json(&manifest_path, &manifest)?;

    Ok(RunArtifacts {
        report_path,
        summary_path,
        manifest_path,
        group_summary_path,
        report,
    })
}

/// Options for completing the missing cells of a tidy CSV.
#[derive(Debug, Clone)]
pub struct CompleteOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub estimator: EstimatorConfig,
    pub scale: Option<(f64, f64)>,
    pub clip: bool,
}

/// Outcome of a completion: how many cells were filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionStats {
    pub n_missing: usize,
    pub n_written: usize,
}

/// Fit one estimator on the observed ratings and write predictions for the
/// previously missing (user, item) pairs only. A fully dense input yields an
/// empty output body (header only).
pub fn cmd_complete(options: &CompleteOptions) -> Result<CompletionStats> {
    let tidy = io::read_tidy_csv(&options.input, None)?;
    let matrix = RatingsMatrix::from_records(&tidy.records, options.scale)?;

    let missing: Vec<(usize, usize)> = {
        let mut cells = Vec::new();
        for u in 0..matrix.n_users() {
            for i in 0..matrix.n_items() {
                if !matrix.is_observed(u, i) {
                    cells.push((u, i));
                }
            }
        }
        cells
    };

    let mut rows = Vec::with_capacity(missing.len());
    if !missing.is_empty() {
        let raw = options.estimator.fit_predict(&matrix, None)?;
        let (lo, hi) = (matrix.scale_min(), matrix.scale_max());
        for &(u, i) in &missing {
            let prediction = raw.get(u, i);
            let (value, clipped) = if options.clip {
                let clamped = prediction.clamp(lo, hi);
                (clamped, clamped != prediction)
            } else {
                (prediction, false)
            };
            rows.push(io::CompletionRow {
                user: matrix.user_labels()[u].clone(),
                item: matrix.item_labels()[i].clone(),
                prediction: value,
                clipped,
            });
        }
    }
    io::write_completions_csv(&options.output, &rows)?;
    Ok(CompletionStats {
        n_missing: missing.len(),
        n_written: rows.len(),
    })
}

/// Generate cluster-structured synthetic data and write it as a dense tidy
/// CSV with a group column.
pub fn cmd_simulate(spec: &ClusterSpec, output: &Path) -> Result<()> {
    let data = simulate_clusters(spec)?;
    io::write_tidy_csv(output, &data.records, Some(&data.groups))
}

/// Compute the user-user similarity matrix of a tidy CSV and dump it.
pub fn cmd_similarity_dump(
    input: &Path,
    output: &Path,
    metric: Metric,
    min_overlap: usize,
    scale: Option<(f64, f64)>,
) -> Result<()> {
    let tidy = io::read_tidy_csv(input, None)?;
    let matrix = RatingsMatrix::from_records(&tidy.records, scale)?;
    let sim = compute_similarity(&matrix, metric, min_overlap);
    io::write_similarity_csv(output, &sim, matrix.user_labels())
}

/// Group labels keyed by user, read straight from a tidy CSV.
pub fn read_group_labels(path: &Path, column: &str) -> Result<HashMap<String, String>> {
    Ok(io::read_tidy_csv(path, Some(column))?.groups)
}
