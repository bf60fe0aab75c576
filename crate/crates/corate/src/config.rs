//! Experiment configuration files.
//!
//! Configs are flat TOML or JSON documents (chosen by file extension). The
//! defaults reproduce the standard setup: sparsity 0.1–0.9 in steps of 0.1,
//! 10 iterations per level, and estimators `mean`, `knn` (k = 10, pearson),
//! and `nnmf_sgd` (learning rate 0.001, factor count = min dimension, no
//! regularization, tolerance 1e-6, at most 1000 iterations).
//!
//! ```toml
//! input = "ratings.csv"
//! output = "results"
//! scale_min = 0.0
//! scale_max = 100.0
//! sparsity = [0.1, 0.5, 0.9]
//! iterations = 10
//! base_seed = 42
//! jobs = 0            # 0 = one worker per CPU
//! clip = false
//! group_column = "group"
//!
//! [dilation]
//! shape = "boxcar"    # or "gaussian"
//! width_seconds = 5
//! sample_rate_hz = 1.0
//!
//! [[estimator]]
//! name = "mean"
//!
//! [[estimator]]
//! name = "knn"
//! k = 10
//! metric = "pearson"
//! min_overlap = 2
//!
//! [[estimator]]
//! name = "nnmf_sgd"
//! gamma = 0.001
//! f = 0               # 0 = min(n_users, n_items)
//! lambdas = { bi = 0.0, bu = 0.0, qi = 0.0, pu = 0.0 }
//! tol = 1e-6
//! max_iters = 1000
//! ```

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dilation::{DilationKernel, KernelShape};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, Lambdas, NnmfSgdConfig};
use crate::evaluation::{ExperimentPlan, PlannedEstimator};
use crate::similarity::Metric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub scale_min: Option<f64>,
    #[serde(default)]
    pub scale_max: Option<f64>,
    #[serde(default = "default_sparsity")]
    pub sparsity: Vec<f64>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub jobs: usize,
    #[serde(default)]
    pub clip: bool,
    #[serde(default)]
    pub group_column: Option<String>,
    #[serde(default)]
    pub dilation: Option<DilationSection>,
    #[serde(default, rename = "estimator")]
    pub estimators: Vec<EstimatorSection>,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_sparsity() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

fn default_iterations() -> usize {
    10
}

fn default_n_boot() -> usize {
    1000
}

fn default_ci_level() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationSection {
    pub shape: String,
    pub width_seconds: u32,
    #[serde(default = "default_sample_rate")]
    pub sample_rate_hz: f64,
}

fn default_sample_rate() -> f64 {
    1.0
}

/// One `[[estimator]]` block. Only the keys matching the named estimator are
/// consulted; unknown names fail validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub name: String,
    /// Report label; defaults to `name`.
    #[serde(default)]
    pub label: Option<String>,
    // knn
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub metric: Option<String>,
    #[serde(default)]
    pub min_overlap: Option<usize>,
    // nnmf (both variants)
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Factor count; 0 or absent = min(n_users, n_items).
    #[serde(default)]
    pub f: Option<usize>,
    #[serde(default)]
    pub lambdas: Option<LambdasSection>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdasSection {
    #[serde(default)]
    pub bi: f64,
    #[serde(default)]
    pub bu: f64,
    #[serde(default)]
    pub qi: f64,
    #[serde(default)]
    pub pu: f64,
}

impl ExperimentConfig {
    /// Parse a TOML (`.toml`) or JSON (`.json`) config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        match ext.as_str() {
            "json" => serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
            _ => toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        }
    }

    /// Check every field the plan depends on, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        for &s in &self.sparsity {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::Config(format!(
                    "sparsity value {s} must lie strictly between 0 and 1"
                )));
            }
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        if let (Some(lo), Some(hi)) = (self.scale_min, self.scale_max) {
            if !(lo < hi) {
                return Err(Error::Config(format!(
                    "scale_min {lo} must be below scale_max {hi}"
                )));
            }
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Config(format!(
                "ci_level {} must lie strictly between 0 and 1",
                self.ci_level
            )));
        }
        if let Some(d) = &self.dilation {
            KernelShape::from_str(&d.shape)
                .map_err(|e| Error::Config(format!("dilation.shape: {e}")))?;
            if d.width_seconds == 0 {
                return Err(Error::Config(
                    "dilation.width_seconds must be >= 1".into(),
                ));
            }
            if !(d.sample_rate_hz > 0.0) {
                return Err(Error::Config(format!(
                    "dilation.sample_rate_hz must be > 0, got {}",
                    d.sample_rate_hz
                )));
            }
        }
        for est in &self.estimators {
            est.to_planned()?;
        }
        Ok(())
    }

    pub fn dilation_kernel(&self) -> Result<Option<DilationKernel>> {
        match &self.dilation {
            None => Ok(None),
            Some(d) => {
                let shape = KernelShape::from_str(&d.shape)
                    .map_err(|e| Error::Config(format!("dilation.shape: {e}")))?;
                Ok(Some(DilationKernel {
                    shape,
                    width_seconds: d.width_seconds,
                    sample_rate_hz: d.sample_rate_hz,
                }))
            }
        }
    }

    /// Materialize the experiment plan, supplying the standard estimator
    /// trio when no `[[estimator]]` block is present.
    pub fn to_plan(&self, group_labels: Option<HashMap<String, String>>) -> Result<ExperimentPlan> {
        self.validate()?;
        let estimators = if self.estimators.is_empty() {
            vec![
                PlannedEstimator::new("mean", EstimatorConfig::Mean),
                PlannedEstimator::new("knn", EstimatorConfig::default_knn()),
                PlannedEstimator::new("nnmf_sgd", EstimatorConfig::default_nnmf_sgd()),
            ]
        } else {
            self.estimators
                .iter()
                .map(|e| e.to_planned())
                .collect::<Result<Vec<_>>>()?
        };
        let plan = ExperimentPlan {
            sparsity_levels: self.sparsity.clone(),
            n_iterations: self.iterations,
            estimators,
            dilation: self.dilation_kernel()?,
            base_seed: self.base_seed,
            clip: self.clip,
            jobs: self.jobs,
            n_boot: self.n_boot,
            ci_level: self.ci_level,
            group_labels,
        };
        plan.validate()?;
        Ok(plan)
    }
}

impl EstimatorSection {
    fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.name.clone())
    }

    pub fn to_planned(&self) -> Result<PlannedEstimator> {
        let config = match self.name.as_str() {
            "mean" => EstimatorConfig::Mean,
            "knn" => {
                let metric = match &self.metric {
                    Some(m) => Metric::from_str(m)
                        .map_err(|e| Error::Config(format!("estimator.metric: {e}")))?,
                    None => Metric::Pearson,
                };
                EstimatorConfig::Knn {
                    k: self.k.unwrap_or(10),
                    metric,
                    min_overlap: self.min_overlap.unwrap_or(2),
                }
            }
            "nnmf_sgd" => {
                let defaults = NnmfSgdConfig::default();
                let lambdas = self
                    .lambdas
                    .map(|l| Lambdas {
                        item_bias: l.bi,
                        user_bias: l.bu,
                        item_factors: l.qi,
                        user_factors: l.pu,
                    })
                    .unwrap_or_default();
                EstimatorConfig::NnmfSgd(NnmfSgdConfig {
                    n_factors: self.f.filter(|&f| f > 0),
                    learning_rate: self.gamma.unwrap_or(defaults.learning_rate),
                    lambdas,
                    tol: self.tol.unwrap_or(defaults.tol),
                    max_iters: self.max_iters.unwrap_or(defaults.max_iters),
                    seed: self.seed.unwrap_or(0),
                    ..defaults
                })
            }
            "nnmf_mult" => EstimatorConfig::NnmfMult {
                n_factors: self.f.filter(|&f| f > 0),
                tol: self.tol.unwrap_or(1e-6),
                max_iters: self.max_iters.unwrap_or(1000),
                seed: self.seed.unwrap_or(0),
            },
            other => {
                return Err(Error::Config(format!(
                    "estimator.name `{other}` is not one of mean, knn, nnmf_sgd, nnmf_mult"
                )))
            }
        };
        Ok(PlannedEstimator::new(self.label(), config))
    }
}
