//! Ratings data model: tidy-record ingestion, the user × item matrix,
//! random masking, and temporal resampling.
//!
//! Missing entries are represented as `f64::NAN` inside the matrix grid.
//! Rows and columns are ordered by the stable sorted order of their labels:
//! numerically when every label parses as an integer (the convention for
//! time-series data, where the item label is a second offset), otherwise
//! lexicographically. This makes the matrix layout independent of record
//! order.

use std::collections::{BTreeMap, HashSet};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observed rating: a single (user, item, value) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub user_id: String,
    pub item_id: String,
    pub rating: f64,
}

impl RatingRecord {
    pub fn new(user_id: impl Into<String>, item_id: impl Into<String>, rating: f64) -> Self {
        Self {
            user_id: user_id.into(),
            item_id: item_id.into(),
            rating,
        }
    }
}

/// Sort labels numerically when they all parse as integers, otherwise
/// lexicographically.
fn sort_labels(labels: &mut Vec<String>) {
    let numeric: Option<Vec<i64>> = labels.iter().map(|l| l.parse::<i64>().ok()).collect();
    match numeric {
        Some(_) => labels.sort_by_key(|l| l.parse::<i64>().unwrap()),
        None => labels.sort(),
    }
}

/// A user × item grid of ratings with scale metadata. Immutable once built.
#[derive(Debug, Clone)]
pub struct RatingsMatrix {
    values: Array2<f64>,
    user_labels: Vec<String>,
    item_labels: Vec<String>,
    scale_min: f64,
    scale_max: f64,
}

impl RatingsMatrix {
    /// Pivot tidy records into a matrix. Unobserved (user, item) pairs become
    /// missing entries. When `scale_bounds` is absent the scale is the
    /// observed min/max; experiments should pass the instrument's nominal
    /// bounds since error normalization divides by the scale range.
    pub fn from_records(
        records: &[RatingRecord],
        scale_bounds: Option<(f64, f64)>,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::NoRecords);
        }
        if let Some((lo, hi)) = scale_bounds {
            if !(lo < hi) {
                return Err(Error::DegenerateScale { min: lo, max: hi });
            }
        }

        let mut seen: HashSet<(&str, &str)> = HashSet::with_capacity(records.len());
        let mut users: Vec<String> = Vec::new();
        let mut items: Vec<String> = Vec::new();
        let mut user_set: HashSet<&str> = HashSet::new();
        let mut item_set: HashSet<&str> = HashSet::new();

        for r in records {
            if !r.rating.is_finite() {
                return Err(Error::InvalidValue {
                    user: r.user_id.clone(),
                    item: r.item_id.clone(),
                });
            }
            if let Some((lo, hi)) = scale_bounds {
                if r.rating < lo || r.rating > hi {
                    return Err(Error::OutOfScale {
                        user: r.user_id.clone(),
                        item: r.item_id.clone(),
                        rating: r.rating,
                        min: lo,
                        max: hi,
                    });
                }
            }
            if !seen.insert((r.user_id.as_str(), r.item_id.as_str())) {
                return Err(Error::DuplicateRating {
                    user: r.user_id.clone(),
                    item: r.item_id.clone(),
                });
            }
            if user_set.insert(r.user_id.as_str()) {
                users.push(r.user_id.clone());
            }
            if item_set.insert(r.item_id.as_str()) {
                items.push(r.item_id.clone());
            }
        }

        sort_labels(&mut users);
        sort_labels(&mut items);

        let user_index: BTreeMap<&str, usize> = users
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let item_index: BTreeMap<&str, usize> = items
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();

        let mut values = Array2::from_elem((users.len(), items.len()), f64::NAN);
        for r in records {
            let u = user_index[r.user_id.as_str()];
            let i = item_index[r.item_id.as_str()];
            values[[u, i]] = r.rating;
        }

        let (scale_min, scale_max) = match scale_bounds {
            Some(b) => b,
            None => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for r in records {
                    lo = lo.min(r.rating);
                    hi = hi.max(r.rating);
                }
                if !(lo < hi) {
                    // Constant ratings cannot define a scale range; callers
                    // must supply explicit bounds.
                    return Err(Error::DegenerateScale { min: lo, max: hi });
                }
                (lo, hi)
            }
        };

        Ok(Self {
            values,
            user_labels: users,
            item_labels: items,
            scale_min,
            scale_max,
        })
    }

    /// Build directly from a dense/sparse grid (NaN = missing). Used by the
    /// synthetic generators and tests.
    pub fn from_grid(
        values: Array2<f64>,
        user_labels: Vec<String>,
        item_labels: Vec<String>,
        scale_bounds: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = scale_bounds;
        if !(lo < hi) {
            return Err(Error::DegenerateScale { min: lo, max: hi });
        }
        if values.nrows() != user_labels.len() || values.ncols() != item_labels.len() {
            return Err(Error::ShapeMismatch {
                expected: (user_labels.len(), item_labels.len()),
                got: (values.nrows(), values.ncols()),
            });
        }
        for v in values.iter() {
            if v.is_infinite() {
                return Err(Error::InvalidValue {
                    user: String::new(),
                    item: String::new(),
                });
            }
        }
        Ok(Self {
            values,
            user_labels,
            item_labels,
            scale_min: lo,
            scale_max: hi,
        })
    }

    pub fn n_users(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_items(&self) -> usize {
        self.values.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_users(), self.n_items())
    }

    pub fn scale_min(&self) -> f64 {
        self.scale_min
    }

    pub fn scale_max(&self) -> f64 {
        self.scale_max
    }

    pub fn scale_range(&self) -> f64 {
        self.scale_max - self.scale_min
    }

    pub fn user_labels(&self) -> &[String] {
        &self.user_labels
    }

    pub fn item_labels(&self) -> &[String] {
        &self.item_labels
    }

    pub fn user_index(&self, label: &str) -> Option<usize> {
        self.user_labels.iter().position(|l| l == label)
    }

    /// Raw grid; NaN marks missing entries.
    pub fn grid(&self) -> &Array2<f64> {
        &self.values
    }

    /// Raw cell value; NaN when missing.
    pub fn value(&self, user: usize, item: usize) -> f64 {
        self.values[[user, item]]
    }

    pub fn get(&self, user: usize, item: usize) -> Option<f64> {
        let v = self.values[[user, item]];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    pub fn is_observed(&self, user: usize, item: usize) -> bool {
        !self.values[[user, item]].is_nan()
    }

    /// Observed cells in row-major order.
    pub fn observed_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for ((u, i), v) in self.values.indexed_iter() {
            if !v.is_nan() {
                cells.push((u, i));
            }
        }
        cells
    }

    pub fn n_observed(&self) -> usize {
        self.values.iter().filter(|v| !v.is_nan()).count()
    }

    pub fn n_missing(&self) -> usize {
        self.values.len() - self.n_observed()
    }

    /// Flatten back to tidy records (observed cells only, row-major order).
    pub fn to_records(&self) -> Vec<RatingRecord> {
        let mut out = Vec::with_capacity(self.n_observed());
        for ((u, i), v) in self.values.indexed_iter() {
            if !v.is_nan() {
                out.push(RatingRecord::new(
                    self.user_labels[u].clone(),
                    self.item_labels[i].clone(),
                    *v,
                ));
            }
        }
        out
    }

    /// Bitwise structural equality, treating NaN as equal to NaN. For tests
    /// and determinism checks; deliberately not `PartialEq`.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.user_labels == other.user_labels
            && self.item_labels == other.item_labels
            && self.scale_min.to_bits() == other.scale_min.to_bits()
            && self.scale_max.to_bits() == other.scale_max.to_bits()
            && self.values.shape() == other.values.shape()
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Item labels parsed as an integer time index, if they all parse.
    pub fn time_index(&self) -> Option<Vec<i64>> {
        self.item_labels
            .iter()
            .map(|l| l.parse::<i64>().ok())
            .collect()
    }

    /// Time index checked for uniform spacing (labels are already sorted
    /// ascending).
    pub fn uniform_time_index(&self) -> Result<Vec<i64>> {
        let idx = self.time_index().ok_or(Error::NotTimeSeries)?;
        if idx.len() >= 2 {
            let step = idx[1] - idx[0];
            if step <= 0 {
                return Err(Error::NotUniformGrid);
            }
            for w in idx.windows(2) {
                if w[1] - w[0] != step {
                    return Err(Error::NotUniformGrid);
                }
            }
        }
        Ok(idx)
    }

    /// Draw a mask hiding exactly `round(fraction * n_observed)` observed
    /// entries, uniformly without replacement. Pre-missing entries are never
    /// eligible: they belong to neither train nor test. Deterministic for a
    /// fixed seed.
    pub fn mask_random(&self, fraction_masked: f64, seed: u64) -> Result<ObservationMask> {
        if !(fraction_masked > 0.0 && fraction_masked < 1.0) {
            return Err(Error::InvalidFraction(fraction_masked));
        }
        let eligible = self.observed_cells();
        let n_mask = (fraction_masked * eligible.len() as f64).round() as usize;

        let mut observed = self.values.mapv(|v| !v.is_nan());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chosen = rand::seq::index::sample(&mut rng, eligible.len(), n_mask);
        for idx in chosen.iter() {
            let (u, i) = eligible[idx];
            observed[[u, i]] = false;
        }

        Ok(ObservationMask {
            observed,
            seed,
            target_fraction_masked: fraction_masked,
        })
    }

    /// Copy of the matrix with masked entries removed. The original is left
    /// untouched; unmasked values are carried over bit-exactly.
    pub fn apply_mask(&self, mask: &ObservationMask) -> Result<Self> {
        if mask.observed.dim() != self.values.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.values.dim(),
                got: mask.observed.dim(),
            });
        }
        let mut values = self.values.clone();
        for ((u, i), keep) in mask.observed.indexed_iter() {
            if !keep {
                values[[u, i]] = f64::NAN;
            }
        }
        Ok(Self {
            values,
            user_labels: self.user_labels.clone(),
            item_labels: self.item_labels.clone(),
            scale_min: self.scale_min,
            scale_max: self.scale_max,
        })
    }

    /// Temporal up/downsampling of a time-series matrix.
    ///
    /// Downsampling averages the non-missing ratings inside each target bin
    /// (a bin is missing only if all its members are); the partial final bin
    /// is kept. Upsampling holds each rating across the finer grid. Item
    /// labels of the result are consecutive sample indices at the target
    /// rate.
    pub fn resample(&self, source_hz: f64, target_hz: f64, mode: ResampleMode) -> Result<Self> {
        if !(source_hz > 0.0 && target_hz > 0.0) {
            return Err(Error::InvalidRate {
                source_hz,
                target_hz,
            });
        }
        self.uniform_time_index()?;

        let n_src = self.n_items();
        let values = match mode {
            ResampleMode::MeanDownsample => {
                if target_hz > source_hz {
                    return Err(Error::InvalidRate {
                        source_hz,
                        target_hz,
                    });
                }
                let ratio = source_hz / target_hz; // samples per bin, >= 1
                let n_tgt = ((n_src as f64) / ratio).ceil() as usize;
                let mut out = Array2::from_elem((self.n_users(), n_tgt), f64::NAN);
                for u in 0..self.n_users() {
                    for t in 0..n_tgt {
                        let lo = (t as f64 * ratio).floor() as usize;
                        let hi = (((t + 1) as f64 * ratio).floor() as usize).min(n_src);
                        let mut sum = 0.0;
                        let mut n = 0usize;
                        for s in lo..hi {
                            let v = self.values[[u, s]];
                            if !v.is_nan() {
                                sum += v;
                                n += 1;
                            }
                        }
                        if n > 0 {
                            out[[u, t]] = sum / n as f64;
                        }
                    }
                }
                out
            }
            ResampleMode::HoldUpsample => {
                if target_hz < source_hz {
                    return Err(Error::InvalidRate {
                        source_hz,
                        target_hz,
                    });
                }
                let ratio = target_hz / source_hz; // output samples per input
                let n_tgt = ((n_src as f64) * ratio).round() as usize;
                let mut out = Array2::from_elem((self.n_users(), n_tgt), f64::NAN);
                for u in 0..self.n_users() {
                    for t in 0..n_tgt {
                        let s = ((t as f64 / ratio).floor() as usize).min(n_src - 1);
                        out[[u, t]] = self.values[[u, s]];
                    }
                }
                out
            }
        };

        let item_labels = (0..values.ncols()).map(|t| t.to_string()).collect();
        Ok(Self {
            values,
            user_labels: self.user_labels.clone(),
            item_labels,
            scale_min: self.scale_min,
            scale_max: self.scale_max,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleMode {
    MeanDownsample,
    HoldUpsample,
}

/// Boolean train/test partition over a matrix: `true` = observed (train),
/// `false` = masked (test). Pre-missing cells are marked `true` but carry no
/// value, so they end up in neither set.
#[derive(Debug, Clone)]
pub struct ObservationMask {
    observed: Array2<bool>,
    seed: u64,
    target_fraction_masked: f64,
}

impl ObservationMask {
    pub fn grid(&self) -> &Array2<bool> {
        &self.observed
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn target_fraction_masked(&self) -> f64 {
        self.target_fraction_masked
    }

    pub fn is_train(&self, user: usize, item: usize) -> bool {
        self.observed[[user, item]]
    }

    /// Masked (test) cells in row-major order.
    pub fn masked_cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for ((u, i), keep) in self.observed.indexed_iter() {
            if !keep {
                cells.push((u, i));
            }
        }
        cells
    }

    pub fn n_masked(&self) -> usize {
        self.observed.iter().filter(|&&b| !b).count()
    }

    pub fn same_cells(&self, other: &Self) -> bool {
        self.observed == other.observed
    }
}
