//! User-based K-nearest-neighbor prediction.
//!
//! A prediction for (user, item) is the similarity-weighted mean of the
//! ratings the user's most similar peers gave that item:
//!
//! ```text
//! prediction(u, i) = sum_v r[v, i] * sim(u, v) / sum_v sim(u, v)
//! ```
//!
//! where `v` ranges over at most `k` users with *defined, strictly positive*
//! similarity to `u` and an observed rating for item `i` (the user itself is
//! never its own neighbor). `k` is a maximum: sparse data can leave fewer or
//! zero usable neighbors. With no usable neighbor the prediction falls back
//! to the item's observed mean, and for items nobody rated, to the global
//! mean.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::estimators::{MeanModel, PredictionMatrix};
use crate::ratings::RatingsMatrix;
use crate::similarity::{compute_similarity, Metric, SimilarityMatrix};

#[derive(Debug, Clone)]
pub struct KnnModel {
    k: usize,
    similarity: SimilarityMatrix,
    train: RatingsMatrix,
    fallback: MeanModel,
    /// Per-user candidate neighbors with positive similarity, ordered by
    /// similarity descending, ties broken by lower user index.
    neighbor_order: Vec<Vec<usize>>,
}

impl KnnModel {
    /// Fit from training observations only: the similarity matrix and the
    /// embedded mean fallback are both computed on `train`.
    pub fn fit(
        train: &RatingsMatrix,
        k: usize,
        metric: Metric,
        min_overlap: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidHyperparameter(
                "knn neighbor count k must be >= 1".into(),
            ));
        }
        let similarity = compute_similarity(train, metric, min_overlap);
        let fallback = MeanModel::fit(train)?;

        let n = train.n_users();
        let mut neighbor_order = Vec::with_capacity(n);
        for u in 0..n {
            let mut candidates: Vec<(usize, f64)> = (0..n)
                .filter(|&v| v != u)
                .filter_map(|v| similarity.get(u, v).map(|s| (v, s)))
                .filter(|&(_, s)| s > 0.0)
                .collect();
            candidates.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .unwrap()
                    .then_with(|| a.0.cmp(&b.0))
            });
            neighbor_order.push(candidates.into_iter().map(|(v, _)| v).collect());
        }

        Ok(Self {
            k,
            similarity,
            train: train.clone(),
            fallback,
            neighbor_order,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn similarity(&self) -> &SimilarityMatrix {
        &self.similarity
    }

    /// The at-most-k neighbors actually usable for (user, item).
    fn usable_neighbors(&self, user: usize, item: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbor_order[user]
            .iter()
            .copied()
            .filter(move |&v| self.train.is_observed(v, item))
            .take(self.k)
    }

    /// Predict one cell via the weighted-neighbor formula with the fallback
    /// cascade. Total: always returns a finite value.
    pub fn predict_cell(&self, user: usize, item: usize) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for v in self.usable_neighbors(user, item) {
            let s = self.similarity.get(user, v).unwrap();
            num += self.train.value(v, item) * s;
            den += s;
        }
        if den > 0.0 {
            num / den
        } else {
            self.fallback.predict_item(item)
        }
    }

    pub fn predict(&self) -> PredictionMatrix {
        let mut grid = Array2::zeros((self.train.n_users(), self.train.n_items()));
        for u in 0..self.train.n_users() {
            for i in 0..self.train.n_items() {
                grid[[u, i]] = self.predict_cell(u, i);
            }
        }
        PredictionMatrix::from_grid(grid)
    }
}
