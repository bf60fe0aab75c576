//! Non-negative matrix factorization with user/item biases.
//!
//! The model predicts a rating as
//!
//! ```text
//! prediction(u, i) = mu + user_bias[u] + item_bias[i] + q_i . p_u
//! ```
//!
//! where `mu` is the global mean of observed training ratings and the factor
//! vectors live in the rows of `user_factors` (n_users × f) and the columns
//! of `item_factors` (f × n_items). Both factor matrices are constrained to
//! stay elementwise non-negative throughout training.
//!
//! Two trainers are provided:
//!
//! * [`NnmfModel::fit_sgd`] — stochastic gradient descent over the observed
//!   ratings only, with per-parameter L2 regularization and projected
//!   non-negativity. This is the estimator that handles sparse matrices
//!   well.
//! * [`NnmfModel::fit_multiplicative`] — the classic multiplicative update
//!   rule, which is not derived for missing data; each sweep fills missing
//!   cells with the current reconstruction. It reconstructs observed entries
//!   extremely well but overfits sparse data, typically scoring no better
//!   than the mean baseline out of sample. It is included for comparison;
//!   prefer the SGD variant for sparse matrices.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::PredictionMatrix;
use crate::ratings::RatingsMatrix;
use crate::seed::mix;

/// Division guard for the multiplicative update denominators.
const MULT_EPS: f64 = 1e-12;

/// Per-parameter L2 regularization weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub item_bias: f64,
    pub user_bias: f64,
    pub item_factors: f64,
    pub user_factors: f64,
}

impl Lambdas {
    pub fn zero() -> Self {
        Self {
            item_bias: 0.0,
            user_bias: 0.0,
            item_factors: 0.0,
            user_factors: 0.0,
        }
    }

    pub fn uniform(value: f64) -> Self {
        Self {
            item_bias: value,
            user_bias: value,
            item_factors: value,
            user_factors: value,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("item_bias", self.item_bias),
            ("user_bias", self.user_bias),
            ("item_factors", self.item_factors),
            ("user_factors", self.user_factors),
        ] {
            if !(v >= 0.0) {
                return Err(Error::InvalidHyperparameter(format!(
                    "lambda for {name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for Lambdas {
    fn default() -> Self {
        Self::zero()
    }
}

/// Factor matrix initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorInit {
    /// `|N(0, 1)| / f` entries: random normal magnitudes scaled down by the
    /// factor count, non-negative from the start.
    ScaledAbsNormal,
    /// All-zero factors. Factor updates are then identically zero, reducing
    /// the model to the additive `mu + user_bias + item_bias` form.
    Zeros,
}

/// When to project factors back onto the non-negative orthant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampMode {
    /// Immediately after each per-rating update (projected SGD).
    PerUpdate,
    /// Once at the end of each full iteration.
    PerIteration,
}

/// Hyperparameters for SGD training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnmfSgdConfig {
    /// Factor count; `None` means `min(n_users, n_items)`.
    pub n_factors: Option<usize>,
    /// Step size shared by all four update rules.
    pub learning_rate: f64,
    pub lambdas: Lambdas,
    /// Stop when the observed-set RMSE changes by at most this much between
    /// consecutive iterations.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub factor_init: FactorInit,
    pub clamp: ClampMode,
}

impl Default for NnmfSgdConfig {
    fn default() -> Self {
        Self {
            n_factors: None,
            learning_rate: 0.001,
            lambdas: Lambdas::zero(),
            tol: 1e-6,
            max_iters: 1000,
            seed: 0,
            factor_init: FactorInit::ScaledAbsNormal,
            clamp: ClampMode::PerUpdate,
        }
    }
}

/// Convergence metadata from a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Full iterations (sweeps over the observed ratings) actually run.
    pub iterations: usize,
    /// Observed-set RMSE after the final iteration.
    pub final_rmse: f64,
    /// Whether the tolerance criterion stopped training before `max_iters`.
    pub converged: bool,
    /// Observed-set RMSE after each iteration.
    pub rmse_history: Vec<f64>,
}

/// How a model was trained, with the hyperparameters used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum NnmfHyperparams {
    Sgd(NnmfSgdConfig),
    Multiplicative {
        n_factors: usize,
        tol: f64,
        max_iters: usize,
        seed: u64,
    },
}

/// A fitted factorization model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NnmfModel {
    /// Global mean of observed training ratings (0 for the multiplicative
    /// variant, which has no bias terms).
    pub mu: f64,
    pub user_bias: Array1<f64>,
    pub item_bias: Array1<f64>,
    /// n_users × f, row per user.
    pub user_factors: Array2<f64>,
    /// f × n_items, column per item.
    pub item_factors: Array2<f64>,
    /// Offset added to the training data to make it non-negative
    /// (multiplicative variant only); subtracted back out of predictions.
    pub value_shift: f64,
    pub n_factors: usize,
    pub hyperparams: NnmfHyperparams,
    pub stats: TrainStats,
}

impl NnmfModel {
    /// Train with stochastic gradient descent on the observed ratings.
    ///
    /// Biases start at zero; factors start from seeded random draws. Each
    /// iteration shuffles the observed (user, item) pairs with an
    /// iteration-specific generator, then walks them one at a time: the
    /// prediction error is computed once and the four parameter updates
    /// (item bias, user bias, item factors, user factors) all consume that
    /// same error, with the two factor updates reading their partner vector
    /// from a pre-update snapshot. Factors are projected to be non-negative
    /// according to `config.clamp`.
    pub fn fit_sgd(train: &RatingsMatrix, config: &NnmfSgdConfig) -> Result<Self> {
        let n_users = train.n_users();
        let n_items = train.n_items();
        let f = config.n_factors.unwrap_or(n_users.min(n_items));
        if f == 0 {
            return Err(Error::InvalidHyperparameter(
                "factor count must be >= 1".into(),
            ));
        }
        if !(config.learning_rate > 0.0) {
            return Err(Error::InvalidHyperparameter(format!(
                "learning rate must be > 0, got {}",
                config.learning_rate
            )));
        }
        if !(config.tol >= 0.0) {
            return Err(Error::InvalidHyperparameter(format!(
                "tol must be >= 0, got {}",
                config.tol
            )));
        }
        if config.max_iters == 0 {
            return Err(Error::InvalidHyperparameter(
                "max_iters must be >= 1".into(),
            ));
        }
        config.lambdas.validate()?;

        let mut pairs: Vec<(usize, usize, f64)> = train
            .observed_cells()
            .into_iter()
            .map(|(u, i)| (u, i, train.value(u, i)))
            .collect();
        if pairs.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let mu = pairs.iter().map(|&(_, _, r)| r).sum::<f64>() / pairs.len() as f64;

        let mut user_bias = vec![0.0; n_users];
        let mut item_bias = vec![0.0; n_items];
        // Flat factor buffers: user-major and item-major for cache locality.
        let mut w = vec![0.0; n_users * f];
        let mut h = vec![0.0; n_items * f];
        if config.factor_init == FactorInit::ScaledAbsNormal {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            for x in w.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *x = z.abs() / f as f64;
            }
            for x in h.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *x = z.abs() / f as f64;
            }
        }

        let lr = config.learning_rate;
        let reg = config.lambdas;
        let mut history = Vec::new();
        let mut converged = false;

        let observed_rmse = |user_bias: &[f64],
                             item_bias: &[f64],
                             w: &[f64],
                             h: &[f64],
                             pairs: &[(usize, usize, f64)]| {
            let mut sq = 0.0;
            for &(u, i, r) in pairs {
                let mut dot = 0.0;
                for k in 0..f {
                    dot += w[u * f + k] * h[i * f + k];
                }
                let e = r - (mu + user_bias[u] + item_bias[i] + dot);
                sq += e * e;
            }
            (sq / pairs.len() as f64).sqrt()
        };

        let mut iterations = 0;
        for iter in 0..config.max_iters {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(config.seed, &[iter as u64 + 1]));
            pairs.shuffle(&mut rng);

            for &(u, i, r) in &pairs {
                let wo = u * f;
                let ho = i * f;
                let mut dot = 0.0;
                for k in 0..f {
                    dot += w[wo + k] * h[ho + k];
                }
                let e = r - (mu + user_bias[u] + item_bias[i] + dot);

                item_bias[i] += lr * (e - reg.item_bias * item_bias[i]);
                user_bias[u] += lr * (e - reg.user_bias * user_bias[u]);
                for k in 0..f {
                    let q = h[ho + k];
                    let p = w[wo + k];
                    let mut q_new = q + lr * (e * p - reg.item_factors * q);
                    let mut p_new = p + lr * (e * q - reg.user_factors * p);
                    if config.clamp == ClampMode::PerUpdate {
                        q_new = q_new.max(0.0);
                        p_new = p_new.max(0.0);
                    }
                    h[ho + k] = q_new;
                    w[wo + k] = p_new;
                }
            }
            if config.clamp == ClampMode::PerIteration {
                for x in w.iter_mut() {
                    *x = x.max(0.0);
                }
                for x in h.iter_mut() {
                    *x = x.max(0.0);
                }
            }

            iterations = iter + 1;
            let rmse = observed_rmse(&user_bias, &item_bias, &w, &h, &pairs);
            if !rmse.is_finite() {
                return Err(Error::Diverged {
                    iteration: iterations,
                    loss: rmse,
                });
            }
            history.push(rmse);
            if iterations >= 2 {
                let delta = (history[iterations - 2] - rmse).abs();
                if delta <= config.tol {
                    converged = true;
                    break;
                }
            }
        }

        let final_rmse = *history.last().unwrap();
        let user_factors = Array2::from_shape_vec((n_users, f), w).unwrap();
        // h is item-major (n_items × f); the model stores f × n_items.
        let item_factors = Array2::from_shape_vec((n_items, f), h)
            .unwrap()
            .reversed_axes()
            .as_standard_layout()
            .to_owned();

        Ok(Self {
            mu,
            user_bias: Array1::from_vec(user_bias),
            item_bias: Array1::from_vec(item_bias),
            user_factors,
            item_factors,
            value_shift: 0.0,
            n_factors: f,
            hyperparams: NnmfHyperparams::Sgd(config.clone()),
            stats: TrainStats {
                iterations,
                final_rmse,
                converged,
                rmse_history: history,
            },
        })
    }

    /// Train with the multiplicative update rule.
    ///
    /// The rule assumes a fully observed non-negative matrix, so each sweep
    /// fills missing cells with the current reconstruction and, if any
    /// observed rating is negative, the whole matrix is shifted by the
    /// minimum first (recorded in `value_shift`). No bias terms are used.
    pub fn fit_multiplicative(
        train: &RatingsMatrix,
        n_factors: Option<usize>,
        tol: f64,
        max_iters: usize,
        seed: u64,
    ) -> Result<Self> {
        let n_users = train.n_users();
        let n_items = train.n_items();
        let f = n_factors.unwrap_or(n_users.min(n_items));
        if f == 0 {
            return Err(Error::InvalidHyperparameter(
                "factor count must be >= 1".into(),
            ));
        }
        if !(tol >= 0.0) {
            return Err(Error::InvalidHyperparameter(format!(
                "tol must be >= 0, got {tol}"
            )));
        }
        if max_iters == 0 {
            return Err(Error::InvalidHyperparameter(
                "max_iters must be >= 1".into(),
            ));
        }

        let cells = train.observed_cells();
        if cells.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let min_observed = cells
            .iter()
            .map(|&(u, i)| train.value(u, i))
            .fold(f64::INFINITY, f64::min);
        let shift = if min_observed < 0.0 { -min_observed } else { 0.0 };

        let shifted: Array2<f64> = train.grid().mapv(|v| if v.is_nan() { 0.0 } else { v + shift });

        // Same init convention as the SGD trainer: normal magnitudes scaled
        // down by the factor count.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = Array2::from_shape_fn((n_users, f), |_| {
            let z: f64 = rng.sample(StandardNormal);
            z.abs() / f as f64
        });
        let mut h = Array2::from_shape_fn((f, n_items), |_| {
            let z: f64 = rng.sample(StandardNormal);
            z.abs() / f as f64
        });

        let mut history = Vec::new();
        let mut converged = false;
        let mut iterations = 0;

        for iter in 0..max_iters {
            // Working target: observed cells hold data, missing cells hold
            // the current reconstruction.
            let recon = w.dot(&h);
            let mut target = recon.clone();
            for &(u, i) in &cells {
                target[[u, i]] = shifted[[u, i]];
            }

            // H <- H * (W^T target) / (W^T W H)
            let num_h = w.t().dot(&target);
            let den_h = w.t().dot(&w).dot(&h) + MULT_EPS;
            h = &h * &(num_h / den_h);

            // W <- W * (target H^T) / (W H H^T), using the updated H.
            let num_w = target.dot(&h.t());
            let den_w = w.dot(&h).dot(&h.t()) + MULT_EPS;
            w = &w * &(num_w / den_w);

            iterations = iter + 1;
            let recon = w.dot(&h);
            let mut sq = 0.0;
            for &(u, i) in &cells {
                let e = shifted[[u, i]] - recon[[u, i]];
                sq += e * e;
            }
            let rmse = (sq / cells.len() as f64).sqrt();
            if !rmse.is_finite() {
                return Err(Error::Diverged {
                    iteration: iterations,
                    loss: rmse,
                });
            }
            history.push(rmse);
            if iterations >= 2 {
                let delta = (history[iterations - 2] - rmse).abs();
                if delta <= tol {
                    converged = true;
                    break;
                }
            }
        }

        let final_rmse = *history.last().unwrap();
        Ok(Self {
            mu: 0.0,
            user_bias: Array1::zeros(n_users),
            item_bias: Array1::zeros(n_items),
            user_factors: w,
            item_factors: h,
            value_shift: shift,
            n_factors: f,
            hyperparams: NnmfHyperparams::Multiplicative {
                n_factors: f,
                tol,
                max_iters,
                seed,
            },
            stats: TrainStats {
                iterations,
                final_rmse,
                converged,
                rmse_history: history,
            },
        })
    }

    pub fn n_users(&self) -> usize {
        self.user_factors.nrows()
    }

    pub fn n_items(&self) -> usize {
        self.item_factors.ncols()
    }

    /// Predict one cell.
    pub fn predict_cell(&self, user: usize, item: usize) -> f64 {
        let dot = self
            .user_factors
            .row(user)
            .dot(&self.item_factors.column(item));
        self.mu + self.user_bias[user] + self.item_bias[item] + dot - self.value_shift
    }

    /// Full prediction grid, unbounded by default.
    pub fn predict(&self) -> PredictionMatrix {
        let mut grid = self.user_factors.dot(&self.item_factors);
        for ((u, i), v) in grid.indexed_iter_mut() {
            *v += self.mu + self.user_bias[u] + self.item_bias[i] - self.value_shift;
        }
        PredictionMatrix::from_grid(grid)
    }

    /// Smallest factor entry across both matrices (>= 0 after any fit).
    pub fn min_factor_entry(&self) -> f64 {
        let a = self.user_factors.iter().cloned().fold(f64::INFINITY, f64::min);
        let b = self.item_factors.iter().cloned().fold(f64::INFINITY, f64::min);
        a.min(b)
    }

    /// Serialize to a self-describing JSON document (biases, row-major factor
    /// matrices, hyperparameters, seed, convergence metadata).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}
