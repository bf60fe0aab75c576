//! Masking cross-validation: error metrics, per-user aggregation, the
//! experiment grid runner, bootstrap intervals, and stratified summaries.
//!
//! The harness repeatedly hides a fraction of the observed ratings, fits
//! every estimator on the identical training view, and scores predictions
//! against the held-out truth. Error is aggregated per user first (mean over
//! iterations within a user, then mean over users), which weights every user
//! equally regardless of how many test cells they drew.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dilation::{dilate, DilationKernel};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, PredictionMatrix};
use crate::ratings::{ObservationMask, RatingsMatrix};
use crate::seed;

/// Root mean squared error of `pred` against `truth` over the given cells.
pub fn rmse(
    pred: &PredictionMatrix,
    truth: &RatingsMatrix,
    test_cells: &[(usize, usize)],
) -> Result<f64> {
    if test_cells.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let mut sq = 0.0;
    for &(u, i) in test_cells {
        let t = truth.get(u, i).ok_or(Error::EmptyTestSet)?;
        let e = t - pred.get(u, i);
        sq += e * e;
    }
    Ok((sq / test_cells.len() as f64).sqrt())
}

/// RMSE divided by the scale range, interpretable as percentage inaccuracy.
///
/// The divisor is `scale_max - scale_min`: a 1–5 scale normalizes by 4, not
/// by the number of scale points, so percentages published with a
/// points-based normalization will differ accordingly. Values can exceed 1
/// when predictions fall far outside the rating scale.
pub fn normalized_error(rmse_value: f64, scale_min: f64, scale_max: f64) -> Result<f64> {
    if !(scale_max > scale_min) {
        return Err(Error::DegenerateScale {
            min: scale_min,
            max: scale_max,
        });
    }
    Ok(rmse_value / (scale_max - scale_min))
}

/// Per-user error for one prediction matrix against one mask.
#[derive(Debug, Clone, PartialEq)]
pub struct UserError {
    pub user: usize,
    pub rmse: f64,
    pub normalized_error: f64,
    pub n_test_cells: usize,
}

/// Errors computed separately for each user over that user's test cells.
/// Users without any test cell are omitted from `per_user` and listed in
/// `omitted`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLevelErrors {
    pub per_user: Vec<UserError>,
    pub omitted: Vec<usize>,
}

pub fn evaluate_user_level(
    pred: &PredictionMatrix,
    truth: &RatingsMatrix,
    mask: &ObservationMask,
    scale: (f64, f64),
) -> Result<UserLevelErrors> {
    let mut by_user: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (u, i) in mask.masked_cells() {
        by_user.entry(u).or_default().push((u, i));
    }
    let mut per_user = Vec::new();
    let mut omitted = Vec::new();
    for u in 0..truth.n_users() {
        match by_user.get(&u) {
            Some(cells) => {
                let r = rmse(pred, truth, cells)?;
                per_user.push(UserError {
                    user: u,
                    rmse: r,
                    normalized_error: normalized_error(r, scale.0, scale.1)?,
                    n_test_cells: cells.len(),
                });
            }
            None => omitted.push(u),
        }
    }
    Ok(UserLevelErrors { per_user, omitted })
}

/// Percentile bootstrap confidence interval for the mean of `values`,
/// resampling users with replacement.
pub fn bootstrap_ci(
    values: &[f64],
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(values.len()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidHyperparameter(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let mut means = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += values[rng.random_range(0..n)];
        }
        means.push(sum / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile(&means, alpha), quantile(&means, 1.0 - alpha)))
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// One estimator in a plan, with the label used in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedEstimator {
    pub label: String,
    pub config: EstimatorConfig,
}

impl PlannedEstimator {
    pub fn new(label: impl Into<String>, config: EstimatorConfig) -> Self {
        Self {
            label: label.into(),
            config,
        }
    }
}

/// Full description of a masking cross-validation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// Fractions of observed ratings to mask, each strictly inside (0, 1).
    pub sparsity_levels: Vec<f64>,
    /// Fresh random masks per sparsity level.
    pub n_iterations: usize,
    pub estimators: Vec<PlannedEstimator>,
    /// Optional kernel applied to each training view after masking.
    pub dilation: Option<DilationKernel>,
    pub base_seed: u64,
    /// Clamp predictions into the rating scale before scoring.
    pub clip: bool,
    /// Worker threads for the grid; 0 means one per available CPU.
    pub jobs: usize,
    pub n_boot: usize,
    pub ci_level: f64,
    /// Optional per-user group labels (keyed by user label) carried into
    /// report records for stratified summaries.
    pub group_labels: Option<HashMap<String, String>>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            sparsity_levels: (1..=9).map(|k| k as f64 / 10.0).collect(),
            n_iterations: 10,
            estimators: vec![
                PlannedEstimator::new("mean", EstimatorConfig::Mean),
                PlannedEstimator::new("knn", EstimatorConfig::default_knn()),
                PlannedEstimator::new("nnmf_sgd", EstimatorConfig::default_nnmf_sgd()),
            ],
            dilation: None,
            base_seed: 0,
            clip: false,
            jobs: 0,
            n_boot: 1000,
            ci_level: 0.95,
            group_labels: None,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.sparsity_levels.is_empty() {
            return Err(Error::InvalidPlan("sparsity grid is empty".into()));
        }
        for &s in &self.sparsity_levels {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::InvalidPlan(format!(
                    "sparsity level {s} must lie strictly between 0 and 1"
                )));
            }
        }
        if self.n_iterations == 0 {
            return Err(Error::InvalidPlan("iterations must be >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidPlan("no estimators configured".into()));
        }
        let mut labels: Vec<&str> = self.estimators.iter().map(|e| e.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.estimators.len() {
            return Err(Error::InvalidPlan(
                "estimator labels must be unique (set `label` to disambiguate)".into(),
            ));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidPlan(format!(
                "ci_level {} must lie strictly between 0 and 1",
                self.ci_level
            )));
        }
        Ok(())
    }
}

/// One (estimator, sparsity, iteration, user) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub estimator: String,
    pub sparsity: f64,
    pub iteration: usize,
    pub user: String,
    pub group: Option<String>,
    pub rmse: f64,
    pub normalized_error: f64,
    pub n_test_cells: usize,
}

/// A grid cell whose estimator failed; the sweep continues without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub estimator: String,
    pub sparsity: f64,
    pub iteration: usize,
    pub error: String,
}

/// A user that drew no test cells in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedUser {
    pub sparsity: f64,
    pub iteration: usize,
    pub user: String,
}

/// Summary row: grand mean with bootstrap interval for one
/// (estimator, sparsity) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: String,
    pub sparsity: f64,
    pub normalized_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_users: usize,
}

/// Per-group summary row from a stratified report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummaryRow {
    pub group: String,
    pub estimator: String,
    pub sparsity: f64,
    pub normalized_error: f64,
    pub n_users: usize,
}

/// Everything a sweep produced, in deterministic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub records: Vec<RunRecord>,
    pub failures: Vec<FailureRecord>,
    pub omitted: Vec<OmittedUser>,
    pub base_seed: u64,
    pub n_boot: usize,
    pub ci_level: f64,
}

impl EvaluationReport {
    /// Mean normalized error per user over iterations, for one estimator at
    /// one sparsity level. Users are keyed by label.
    pub fn per_user_means(&self, estimator: &str, sparsity: f64) -> BTreeMap<String, f64> {
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in &self.records {
            if r.estimator == estimator && r.sparsity == sparsity {
                let e = sums.entry(r.user.clone()).or_insert((0.0, 0));
                e.0 += r.normalized_error;
                e.1 += 1;
            }
        }
        sums.into_iter()
            .map(|(u, (sum, n))| (u, sum / n as f64))
            .collect()
    }

    /// Mean over users of the per-user iteration means.
    pub fn grand_mean(&self, estimator: &str, sparsity: f64) -> Option<f64> {
        let means = self.per_user_means(estimator, sparsity);
        if means.is_empty() {
            return None;
        }
        Some(means.values().sum::<f64>() / means.len() as f64)
    }

    /// Summary rows (grand means plus bootstrap intervals over users) for
    /// every (estimator, sparsity) pair present in the records.
    pub fn summary(&self) -> Result<Vec<SummaryRow>> {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in &self.records {
            let key = (r.estimator.clone(), r.sparsity);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let mut estimator_order: Vec<String> = Vec::new();
        for r in &self.records {
            if !estimator_order.contains(&r.estimator) {
                estimator_order.push(r.estimator.clone());
            }
        }

        let mut rows = Vec::new();
        for (est, sparsity) in keys {
            let means = self.per_user_means(&est, sparsity);
            let values: Vec<f64> = means.values().cloned().collect();
            let grand = values.iter().sum::<f64>() / values.len() as f64;
            let est_idx = estimator_order.iter().position(|e| *e == est).unwrap();
            let (lo, hi) = if values.len() >= 2 {
                bootstrap_ci(
                    &values,
                    self.n_boot,
                    self.ci_level,
                    seed::bootstrap_seed(self.base_seed, est_idx, sparsity),
                )?
            } else {
                (grand, grand)
            };
            rows.push(SummaryRow {
                estimator: est,
                sparsity,
                normalized_error: grand,
                ci_low: lo,
                ci_high: hi,
                n_users: values.len(),
            });
        }
        rows.sort_by(|a, b| {
            a.estimator
                .cmp(&b.estimator)
                .then(a.sparsity.partial_cmp(&b.sparsity).unwrap())
        });
        Ok(rows)
    }
}

/// Restrict a report's aggregation to within each group. Models are trained
/// on all users; only the summary is split. Every user appearing in the
/// records must have a label.
pub fn stratify_report(
    report: &EvaluationReport,
    group_labels: &HashMap<String, String>,
) -> Result<Vec<GroupSummaryRow>> {
    let mut keys: Vec<(String, String, f64)> = Vec::new();
    for r in &report.records {
        let group = group_labels
            .get(&r.user)
            .ok_or_else(|| Error::MissingLabel(r.user.clone()))?;
        let key = (group.clone(), r.estimator.clone(), r.sparsity);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.partial_cmp(&b.2).unwrap())
    });

    let mut rows = Vec::new();
    for (group, est, sparsity) in keys {
        let means = report.per_user_means(&est, sparsity);
        let values: Vec<f64> = means
            .iter()
            .filter(|(user, _)| group_labels[*user] == group)
            .map(|(_, v)| *v)
            .collect();
        rows.push(GroupSummaryRow {
            group,
            estimator: est,
            sparsity,
            normalized_error: values.iter().sum::<f64>() / values.len() as f64,
            n_users: values.len(),
        });
    }
    Ok(rows)
}

/// Run the full masking sweep described by `plan` over a ratings matrix.
///
/// For each (sparsity, iteration) pair a mask is drawn with a seed derived
/// from `(base_seed, sparsity, iteration)`, the optional dilation kernel is
/// applied to the masked training view, and every estimator fits that same
/// view. Grid cells run in a parallel worker pool; results are identical at
/// any parallelism degree because every cell derives its own seeds and the
/// output is sorted by grid coordinates.
pub fn run_experiment(matrix: &RatingsMatrix, plan: &ExperimentPlan) -> Result<EvaluationReport> {
    plan.validate()?;
    let scale = (matrix.scale_min(), matrix.scale_max());

    // (estimator index, sparsity index, iteration) work list.
    let mut tasks = Vec::new();
    for (ei, _) in plan.estimators.iter().enumerate() {
        for (si, _) in plan.sparsity_levels.iter().enumerate() {
            for iter in 0..plan.n_iterations {
                tasks.push((ei, si, iter));
            }
        }
    }

    struct CellOutcome {
        ei: usize,
        si: usize,
        iteration: usize,
        result: std::result::Result<Vec<UserError>, String>,
        omitted: Vec<usize>,
    }

    let run_cell = |&(ei, si, iteration): &(usize, usize, usize)| -> Result<CellOutcome> {
        let sparsity = plan.sparsity_levels[si];
        let mask_seed = seed::mask_seed(plan.base_seed, sparsity, iteration);
        let mask = matrix.mask_random(sparsity, mask_seed)?;
        let masked = matrix.apply_mask(&mask)?;
        let train = match &plan.dilation {
            Some(kernel) => dilate(&masked, kernel)?.matrix,
            None => masked,
        };

        // Mask-determined regardless of whether the fit succeeds.
        let mut has_test = vec![false; matrix.n_users()];
        for (u, _) in mask.masked_cells() {
            has_test[u] = true;
        }
        let omitted: Vec<usize> = (0..matrix.n_users()).filter(|&u| !has_test[u]).collect();

        let est = &plan.estimators[ei];
        let fit_seed = seed::fit_seed(plan.base_seed, ei, sparsity, iteration);
        let outcome = est
            .config
            .fit_predict(&train, Some(fit_seed))
            .and_then(|pred| {
                let pred = if plan.clip {
                    pred.clip(scale.0, scale.1)?
                } else {
                    pred
                };
                evaluate_user_level(&pred, matrix, &mask, scale)
            });
        Ok(match outcome {
            Ok(errors) => CellOutcome {
                ei,
                si,
                iteration,
                result: Ok(errors.per_user),
                omitted,
            },
            Err(e) => CellOutcome {
                ei,
                si,
                iteration,
                result: Err(e.to_string()),
                omitted,
            },
        })
    };

    let outcomes: Vec<CellOutcome> = if plan.jobs == 1 {
        tasks.iter().map(|t| run_cell(t)).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(plan.jobs)
            .build()
            .map_err(|e| Error::InvalidPlan(format!("worker pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run_cell).collect::<Result<_>>())?
    };

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut omitted = Vec::new();
    for outcome in outcomes {
        let est = &plan.estimators[outcome.ei];
        let sparsity = plan.sparsity_levels[outcome.si];
        match outcome.result {
            Ok(per_user) => {
                for ue in per_user {
                    let user = matrix.user_labels()[ue.user].clone();
                    let group = plan
                        .group_labels
                        .as_ref()
                        .and_then(|g| g.get(&user).cloned());
                    records.push(RunRecord {
                        estimator: est.label.clone(),
                        sparsity,
                        iteration: outcome.iteration,
                        user,
                        group,
                        rmse: ue.rmse,
                        normalized_error: ue.normalized_error,
                        n_test_cells: ue.n_test_cells,
                    });
                }
            }
            Err(error) => failures.push(FailureRecord {
                estimator: est.label.clone(),
                sparsity,
                iteration: outcome.iteration,
                error,
            }),
        }
        // Omitted users are mask-determined and identical across estimators;
        // record them once, from the first estimator's cells.
        if outcome.ei == 0 {
            for u in outcome.omitted {
                omitted.push(OmittedUser {
                    sparsity,
                    iteration: outcome.iteration,
                    user: matrix.user_labels()[u].clone(),
                });
            }
        }
    }

    // Deterministic output order: estimator (plan order), sparsity,
    // iteration, user.
    let estimator_rank: HashMap<&str, usize> = plan
        .estimators
        .iter()
        .enumerate()
        .map(|(i, e)| (e.label.as_str(), i))
        .collect();
    records.sort_by(|a, b| {
        estimator_rank[a.estimator.as_str()]
            .cmp(&estimator_rank[b.estimator.as_str()])
            .then(a.sparsity.partial_cmp(&b.sparsity).unwrap())
            .then(a.iteration.cmp(&b.iteration))
            .then(a.user.cmp(&b.user))
    });
    failures.sort_by(|a, b| {
        estimator_rank[a.estimator.as_str()]
            .cmp(&estimator_rank[b.estimator.as_str()])
            .then(a.sparsity.partial_cmp(&b.sparsity).unwrap())
            .then(a.iteration.cmp(&b.iteration))
    });
    omitted.sort_by(|a, b| {
        a.sparsity
            .partial_cmp(&b.sparsity)
            .unwrap()
            .then(a.iteration.cmp(&b.iteration))
            .then(a.user.cmp(&b.user))
    });

    Ok(EvaluationReport {
        records,
        failures,
        omitted,
        base_seed: plan.base_seed,
        n_boot: plan.n_boot,
        ci_level: plan.ci_level,
    })
}
