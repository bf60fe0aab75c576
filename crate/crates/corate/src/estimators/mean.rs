//! Baseline mean-imputation model: predict each item by the mean of its
//! observed training ratings, falling back to the global mean for items
//! nobody rated.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::PredictionMatrix;
use crate::ratings::RatingsMatrix;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanModel {
    /// Per-item mean of observed training ratings; `None` for items with no
    /// training observations.
    item_means: Vec<Option<f64>>,
    /// Mean over all observed training ratings.
    global_mean: f64,
    n_users: usize,
}

impl MeanModel {
    pub fn fit(train: &RatingsMatrix) -> Result<Self> {
        let mut total = 0.0;
        let mut count = 0usize;
        let mut item_means = Vec::with_capacity(train.n_items());
        for i in 0..train.n_items() {
            let mut sum = 0.0;
            let mut n = 0usize;
            for u in 0..train.n_users() {
                if let Some(v) = train.get(u, i) {
                    sum += v;
                    n += 1;
                }
            }
            total += sum;
            count += n;
            item_means.push(if n > 0 { Some(sum / n as f64) } else { None });
        }
        if count == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        Ok(Self {
            item_means,
            global_mean: total / count as f64,
            n_users: train.n_users(),
        })
    }

    pub fn global_mean(&self) -> f64 {
        self.global_mean
    }

    pub fn item_mean(&self, item: usize) -> Option<f64> {
        self.item_means[item]
    }

    /// Item mean, or the global mean when the item was never observed.
    pub fn predict_item(&self, item: usize) -> f64 {
        self.item_means[item].unwrap_or(self.global_mean)
    }

    pub fn predict(&self) -> PredictionMatrix {
        let n_items = self.item_means.len();
        let mut grid = Array2::zeros((self.n_users, n_items));
        for i in 0..n_items {
            let v = self.predict_item(i);
            grid.column_mut(i).fill(v);
        }
        PredictionMatrix::from_grid(grid)
    }
}
