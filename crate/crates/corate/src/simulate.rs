//! Synthetic cluster data: groups of users sharing a latent item profile
//! plus independent noise. Useful for benchmarking how much structure the
//! estimators can exploit.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratings::{RatingRecord, RatingsMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub n_groups: usize,
    pub users_per_group: usize,
    pub n_items: usize,
    /// Standard deviation of the per-rating noise.
    pub noise_sd: f64,
    pub seed: u64,
    pub scale_min: f64,
    pub scale_max: f64,
}

impl ClusterSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_groups == 0 || self.users_per_group == 0 || self.n_items == 0 {
            return Err(Error::InvalidPlan(
                "groups, users-per-group, and items must all be >= 1".into(),
            ));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidPlan(format!(
                "noise sd must be >= 0, got {}",
                self.noise_sd
            )));
        }
        if !(self.scale_min < self.scale_max) {
            return Err(Error::InvalidPlan(format!(
                "scale bounds ({}, {}) are degenerate",
                self.scale_min, self.scale_max
            )));
        }
        Ok(())
    }
}

/// Dense tidy records plus the group label of each user.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub records: Vec<RatingRecord>,
    pub groups: HashMap<String, String>,
}

impl SimulatedData {
    pub fn matrix(&self, scale: (f64, f64)) -> Result<RatingsMatrix> {
        RatingsMatrix::from_records(&self.records, Some(scale))
    }
}

/// Generate dense group-structured ratings.
///
/// Each group has a latent per-item profile drawn uniformly inside the
/// scale; every user in the group rates each item as profile + noise,
/// clamped to the scale. With exactly two groups the second profile is the
/// mirror of the first around the scale midpoint, which makes the groups
/// anti-correlated; with any other count each group draws independently.
pub fn simulate_clusters(spec: &ClusterSpec) -> Result<SimulatedData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = (spec.scale_min, spec.scale_max);

    let base: Vec<f64> = (0..spec.n_items)
        .map(|_| lo + rng.random::<f64>() * (hi - lo))
        .collect();
    let profiles: Vec<Vec<f64>> = (0..spec.n_groups)
        .map(|g| {
            if g == 0 {
                base.clone()
            } else if spec.n_groups == 2 {
                base.iter().map(|p| lo + hi - p).collect()
            } else {
                (0..spec.n_items)
                    .map(|_| lo + rng.random::<f64>() * (hi - lo))
                    .collect()
            }
        })
        .collect();

    let n_users = spec.n_groups * spec.users_per_group;
    let user_width = (n_users.max(2) as f64).log10().ceil() as usize;
    let item_width = (spec.n_items.max(2) as f64).log10().ceil() as usize;

    let mut records = Vec::with_capacity(n_users * spec.n_items);
    let mut groups = HashMap::new();
    for g in 0..spec.n_groups {
        for uu in 0..spec.users_per_group {
            let u = g * spec.users_per_group + uu;
            let user = format!("u{u:0user_width$}");
            groups.insert(user.clone(), format!("g{g}"));
            for (i, profile) in profiles[g].iter().enumerate() {
                let noise: f64 = rng.sample::<f64, _>(StandardNormal) * spec.noise_sd;
                let rating = (profile + noise).clamp(lo, hi);
                records.push(RatingRecord::new(
                    user.clone(),
                    format!("{i:0item_width$}"),
                    rating,
                ));
            }
        }
    }
    Ok(SimulatedData { records, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{compute_similarity, Metric};

    fn spec(n_groups: usize, users_per_group: usize, noise_sd: f64) -> ClusterSpec {
        ClusterSpec {
            n_groups,
            users_per_group,
            n_items: 24,
            noise_sd,
            seed: 3,
            scale_min: 0.0,
            scale_max: 100.0,
        }
    }

    #[test]
    fn one_noiseless_group_means_identical_users() {
        let data = simulate_clusters(&spec(1, 4, 0.0)).unwrap();
        let m = data.matrix((0.0, 100.0)).unwrap();
        for i in 0..m.n_items() {
            let first = m.value(0, i);
            for u in 1..m.n_users() {
                assert_eq!(m.value(u, i), first);
            }
        }
    }

    #[test]
    fn two_groups_are_anticorrelated() {
        let data = simulate_clusters(&spec(2, 3, 1.0)).unwrap();
        let m = data.matrix((0.0, 100.0)).unwrap();
        let sim = compute_similarity(&m, Metric::Pearson, 2);
        // Within group positive, across groups negative.
        assert!(sim.get(0, 1).unwrap() > 0.5);
        assert!(sim.get(3, 4).unwrap() > 0.5);
        assert!(sim.get(0, 3).unwrap() < -0.5);
    }

    #[test]
    fn similarity_matrix_shows_the_block_structure() {
        // Block-mean check: the average within-group similarity must exceed
        // the average across-group similarity by a wide margin.
        let data = simulate_clusters(&spec(2, 5, 5.0)).unwrap();
        let m = data.matrix((0.0, 100.0)).unwrap();
        let sim = compute_similarity(&m, Metric::Pearson, 2);
        let n = m.n_users();
        let group_of = |u: usize| &data.groups[&m.user_labels()[u]];
        let mut within = (0.0, 0usize);
        let mut across = (0.0, 0usize);
        for u in 0..n {
            for v in (u + 1)..n {
                let s = sim.get(u, v).unwrap();
                if group_of(u) == group_of(v) {
                    within.0 += s;
                    within.1 += 1;
                } else {
                    across.0 += s;
                    across.1 += 1;
                }
            }
        }
        let within_mean = within.0 / within.1 as f64;
        let across_mean = across.0 / across.1 as f64;
        assert!(
            within_mean > across_mean + 1.0,
            "within {within_mean} vs across {across_mean}"
        );
    }

    #[test]
    fn generation_is_deterministic_and_validated() {
        let a = simulate_clusters(&spec(2, 3, 2.0)).unwrap();
        let b = simulate_clusters(&spec(2, 3, 2.0)).unwrap();
        assert_eq!(a.records, b.records);

        let mut bad = spec(0, 3, 2.0);
        assert!(simulate_clusters(&bad).is_err());
        bad = spec(1, 1, -1.0);
        assert!(simulate_clusters(&bad).is_err());
    }
}
