//! Property tests for the cross-module invariants.

mod common;

use std::collections::HashMap;

use corate::{
    compute_similarity, dilate, normalized_error, rmse, run_experiment, DilationKernel,
    EstimatorConfig, ExperimentPlan, KnnModel, MeanModel, Metric, NnmfModel, NnmfSgdConfig,
    PlannedEstimator, PredictionMatrix, RatingRecord, RatingsMatrix,
};
use ndarray::Array2;
use proptest::prelude::*;

use common::{knn_oracle_predict, random_dense, sinusoid_panel};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// Small dense grids of finite ratings in [0, 100).
fn grid_strategy(max_users: usize, max_items: usize) -> impl Strategy<Value = Array2<f64>> {
    (2..=max_users, 2..=max_items).prop_flat_map(|(nu, ni)| {
        proptest::collection::vec(0.0..100.0f64, nu * ni)
            .prop_map(move |v| Array2::from_shape_vec((nu, ni), v).unwrap())
    })
}

fn matrix_from(grid: Array2<f64>) -> RatingsMatrix {
    let (nu, ni) = (grid.nrows(), grid.ncols());
    RatingsMatrix::from_grid(
        grid,
        (0..nu).map(|u| format!("u{u:03}")).collect(),
        (0..ni).map(|i| i.to_string()).collect(),
        (0.0, 100.0),
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Ratings data model
// ---------------------------------------------------------------------------

/// A record list can only represent users and items with at least one
/// observation, so round-trip properties require occupied rows and columns.
fn all_lines_occupied(m: &RatingsMatrix) -> bool {
    (0..m.n_users()).all(|u| (0..m.n_items()).any(|i| m.is_observed(u, i)))
        && (0..m.n_items()).all(|i| (0..m.n_users()).any(|u| m.is_observed(u, i)))
}

proptest! {
    /// Flattening a matrix to records and re-ingesting rebuilds it exactly.
    #[test]
    fn ingest_round_trip(grid in grid_strategy(8, 8), seed in 0u64..1000) {
        let m = matrix_from(grid);
        let dense_again = RatingsMatrix::from_records(
            &m.to_records(),
            Some((m.scale_min(), m.scale_max())),
        ).unwrap();
        prop_assert!(m.bit_eq(&dense_again));

        let masked = m.apply_mask(&m.mask_random(0.4, seed).unwrap()).unwrap();
        prop_assume!(all_lines_occupied(&masked));
        let again = RatingsMatrix::from_records(
            &masked.to_records(),
            Some((masked.scale_min(), masked.scale_max())),
        ).unwrap();
        prop_assert!(masked.bit_eq(&again));
    }

    /// Masked-entry counts are exact for every tenth fraction and any shape.
    #[test]
    fn mask_counts_are_exact(grid in grid_strategy(12, 12), tenth in 1usize..=9, seed in 0u64..1000) {
        let m = matrix_from(grid);
        let f = tenth as f64 / 10.0;
        let mask = m.mask_random(f, seed).unwrap();
        let expect = (f * m.n_observed() as f64).round() as usize;
        prop_assert_eq!(mask.n_masked(), expect);
    }

    /// Applying a mask never alters surviving values (bit-exact) and never
    /// touches the original.
    #[test]
    fn apply_mask_preserves_unmasked_bits(grid in grid_strategy(8, 8), seed in 0u64..1000) {
        let m = matrix_from(grid.clone());
        let mask = m.mask_random(0.5, seed).unwrap();
        let masked = m.apply_mask(&mask).unwrap();
        for ((u, i), v) in grid.indexed_iter() {
            if mask.is_train(u, i) {
                prop_assert_eq!(masked.value(u, i).to_bits(), v.to_bits());
            } else {
                prop_assert!(masked.value(u, i).is_nan());
            }
            prop_assert_eq!(m.value(u, i).to_bits(), v.to_bits());
        }
    }

    /// Downsample-then-upsample at the same rate pair preserves the length
    /// up to the rounding of the final partial bin.
    #[test]
    fn resample_round_trip_length(n in 2usize..40, factor in 2usize..5) {
        let grid = Array2::from_shape_fn((1, n), |(_, i)| i as f64);
        let m = matrix_from(grid);
        let down = m.resample(
            factor as f64,
            1.0,
            corate::ResampleMode::MeanDownsample,
        ).unwrap();
        let up = down.resample(
            1.0,
            factor as f64,
            corate::ResampleMode::HoldUpsample,
        ).unwrap();
        let diff = up.n_items() as isize - n as isize;
        prop_assert!(diff.unsigned_abs() < factor, "length {} vs {}", up.n_items(), n);
    }
}

// ---------------------------------------------------------------------------
// Similarity
// ---------------------------------------------------------------------------

proptest! {
    /// Pearson and cosine agree exactly on co-rated vectors whose means are
    /// exactly zero.
    #[test]
    fn pearson_equals_cosine_when_centered(
        pairs in proptest::collection::vec((-20i32..=20, -20i32..=20), 3..8),
    ) {
        // Close each integer vector with its negated sum so the mean is
        // exactly zero in f64.
        let mut xs: Vec<f64> = pairs.iter().map(|&(x, _)| x as f64).collect();
        let mut ys: Vec<f64> = pairs.iter().map(|&(_, y)| y as f64).collect();
        xs.push(-xs.iter().sum::<f64>());
        ys.push(-ys.iter().sum::<f64>());
        prop_assume!(xs.iter().any(|&v| v != 0.0) && ys.iter().any(|&v| v != 0.0));

        let mut records = Vec::new();
        for (i, (&x, &y)) in xs.iter().zip(ys.iter()).enumerate() {
            records.push(RatingRecord::new("a", format!("{i:02}"), x));
            records.push(RatingRecord::new("b", format!("{i:02}"), y));
        }
        let m = RatingsMatrix::from_records(&records, Some((-100.0, 100.0))).unwrap();
        let p = compute_similarity(&m, Metric::Pearson, 2).get(0, 1);
        let c = compute_similarity(&m, Metric::Cosine, 2).get(0, 1);
        match (p, c) {
            (Some(p), Some(c)) => prop_assert_eq!(p.to_bits(), c.to_bits()),
            (None, None) => {}
            other => prop_assert!(false, "defined mismatch {:?}", other),
        }
    }

    /// Permuting item columns (both users together) leaves similarity
    /// unchanged up to summation rounding.
    #[test]
    fn similarity_invariant_to_item_permutation(
        grid in grid_strategy(5, 8),
        perm_seed in 0u64..1000,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let m = matrix_from(grid.clone());

        let ni = grid.ncols();
        let mut order: Vec<usize> = (0..ni).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed);
        order.shuffle(&mut rng);
        let permuted = Array2::from_shape_fn(grid.dim(), |(u, i)| grid[[u, order[i]]]);
        let mp = matrix_from(permuted);

        for metric in [Metric::Pearson, Metric::Cosine, Metric::Spearman, Metric::Kendall] {
            let a = compute_similarity(&m, metric, 2);
            let b = compute_similarity(&mp, metric, 2);
            for u in 0..m.n_users() {
                for v in 0..m.n_users() {
                    match (a.get(u, v), b.get(u, v)) {
                        (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                        (None, None) => {}
                        other => prop_assert!(false, "defined mismatch {:?}", other),
                    }
                }
            }
        }
    }

    /// Pearson is invariant under positive affine transforms of one user's
    /// ratings; cosine under positive scaling.
    #[test]
    fn similarity_transform_invariances(
        grid in grid_strategy(4, 8),
        a in 0.1..5.0f64,
        b in -10.0..10.0f64,
    ) {
        let m = matrix_from(grid.clone());
        let mut scaled = grid.clone();
        for i in 0..grid.ncols() {
            scaled[[0, i]] = a * grid[[0, i]] + b;
        }
        let ms = RatingsMatrix::from_grid(
            scaled.clone(),
            m.user_labels().to_vec(),
            m.item_labels().to_vec(),
            (-2000.0, 2000.0),
        ).unwrap();
        let p1 = compute_similarity(&m, Metric::Pearson, 2);
        let p2 = compute_similarity(&ms, Metric::Pearson, 2);
        for v in 1..m.n_users() {
            if let (Some(x), Some(y)) = (p1.get(0, v), p2.get(0, v)) {
                prop_assert!((x - y).abs() < 1e-9, "pearson affine: {} vs {}", x, y);
            }
        }

        // Cosine: scaling only (b = 0).
        let mut rescaled = grid.clone();
        for i in 0..grid.ncols() {
            rescaled[[0, i]] = a * grid[[0, i]];
        }
        let mc = RatingsMatrix::from_grid(
            rescaled,
            m.user_labels().to_vec(),
            m.item_labels().to_vec(),
            (-2000.0, 2000.0),
        ).unwrap();
        let c1 = compute_similarity(&m, Metric::Cosine, 2);
        let c2 = compute_similarity(&mc, Metric::Cosine, 2);
        for v in 1..m.n_users() {
            if let (Some(x), Some(y)) = (c1.get(0, v), c2.get(0, v)) {
                prop_assert!((x - y).abs() < 1e-9, "cosine scaling: {} vs {}", x, y);
            }
        }
    }

    /// Every defined similarity lies in [-1, 1] within 1e-12.
    #[test]
    fn similarity_bounds(grid in grid_strategy(6, 9), seed in 0u64..1000) {
        let m = matrix_from(grid);
        let train = m.apply_mask(&m.mask_random(0.3, seed).unwrap()).unwrap();
        for metric in [Metric::Pearson, Metric::Cosine, Metric::Spearman, Metric::Kendall] {
            let sim = compute_similarity(&train, metric, 2);
            for u in 0..train.n_users() {
                for v in 0..train.n_users() {
                    if let Some(s) = sim.get(u, v) {
                        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

proptest! {
    /// KNN predictions equal the brute-force oracle on random instances.
    #[test]
    fn knn_equals_oracle(grid in grid_strategy(8, 10), seed in 0u64..500, k in 1usize..6) {
        let m = matrix_from(grid);
        let train = m.apply_mask(&m.mask_random(0.4, seed).unwrap()).unwrap();
        if MeanModel::fit(&train).is_err() {
            return Ok(()); // fully masked draw; nothing to predict from
        }
        let model = KnnModel::fit(&train, k, Metric::Pearson, 2).unwrap();
        for u in 0..train.n_users() {
            for i in 0..train.n_items() {
                let got = model.predict_cell(u, i);
                let expect = knn_oracle_predict(&train, k, 2, u, i);
                prop_assert!((got - expect).abs() <= 1e-10);
            }
        }
    }
}

/// Reverse user order by relabeling, rebuilding the sorted matrix.
fn reverse_users(m: &RatingsMatrix) -> (RatingsMatrix, Vec<usize>) {
    let n = m.n_users();
    let records: Vec<RatingRecord> = m
        .to_records()
        .into_iter()
        .map(|r| {
            let idx = m.user_index(&r.user_id).unwrap();
            RatingRecord::new(format!("u{:03}", n - 1 - idx), r.item_id, r.rating)
        })
        .collect();
    let perm: Vec<usize> = (0..n).rev().collect();
    (
        RatingsMatrix::from_records(&records, Some((m.scale_min(), m.scale_max()))).unwrap(),
        perm,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The mean model ignores user order; KNN predictions permute exactly
    /// with the users (continuous ratings make similarity ties negligible).
    #[test]
    fn mean_and_knn_respect_user_permutation(data_seed in 0u64..10_000, seed in 0u64..200) {
        let m = random_dense(7, 9, 100.0, 40_000 + data_seed);
        let train = m.apply_mask(&m.mask_random(0.3, seed).unwrap()).unwrap();
        prop_assume!(all_lines_occupied(&train));
        let (train_rev, perm) = reverse_users(&train);

        let a = MeanModel::fit(&train).unwrap().predict();
        let b = MeanModel::fit(&train_rev).unwrap().predict();
        for u in 0..train.n_users() {
            for i in 0..train.n_items() {
                prop_assert!((a.get(u, i) - b.get(perm[u], i)).abs() < 1e-12);
            }
        }

        let ka = KnnModel::fit(&train, 3, Metric::Pearson, 2).unwrap().predict();
        let kb = KnnModel::fit(&train_rev, 3, Metric::Pearson, 2).unwrap().predict();
        for u in 0..train.n_users() {
            for i in 0..train.n_items() {
                prop_assert!((ka.get(u, i) - kb.get(perm[u], i)).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Seeded SGD ties its random streams to row indices, so factorization
    /// predictions are equivariant only statistically: on structured data,
    /// after unpermuting, the two prediction grids agree to a small fraction
    /// of the scale.
    #[test]
    fn nnmf_is_statistically_equivariant(seed in 0u64..100) {
        use rand::Rng;
        use rand::SeedableRng;
        // Rank-1 structure plus light noise.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7_000 + seed);
        let amps: Vec<f64> = (0..10).map(|_| 1.0 + 2.0 * rng.random::<f64>()).collect();
        let prof: Vec<f64> = (0..14).map(|_| 1.0 + 2.0 * rng.random::<f64>()).collect();
        let grid = Array2::from_shape_fn((10, 14), |(u, i)| {
            let noise: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal);
            (amps[u] * prof[i] + 0.1 * noise).clamp(0.0, 12.0)
        });
        let m = RatingsMatrix::from_grid(
            grid,
            (0..10).map(|u| format!("u{u:03}")).collect(),
            (0..14).map(|i| i.to_string()).collect(),
            (0.0, 12.0),
        ).unwrap();
        let train = m.apply_mask(&m.mask_random(0.4, seed).unwrap()).unwrap();
        prop_assume!(all_lines_occupied(&train));
        let (train_rev, perm) = reverse_users(&train);
        let config = NnmfSgdConfig {
            n_factors: Some(2),
            max_iters: 500,
            seed: 5,
            ..Default::default()
        };
        let a = NnmfModel::fit_sgd(&train, &config).unwrap().predict();
        let b = NnmfModel::fit_sgd(&train_rev, &config).unwrap().predict();
        let mut total = 0.0;
        for u in 0..train.n_users() {
            for i in 0..train.n_items() {
                total += (a.get(u, i) - b.get(perm[u], i)).abs();
            }
        }
        let mean_delta = total / (train.n_users() * train.n_items()) as f64;
        prop_assert!(
            mean_delta <= 0.025 * m.scale_range(),
            "mean |delta| {} on range {}",
            mean_delta,
            m.scale_range()
        );
    }

    /// Observed-set RMSE at convergence never exceeds the RMSE after the
    /// first iteration, and factors stay non-negative; identical seeds give
    /// bit-identical parameters.
    #[test]
    fn nnmf_training_invariants(seed in 0u64..100) {
        let m = random_dense(7, 9, 80.0, 9_000 + seed);
        let train = m.apply_mask(&m.mask_random(0.3, seed).unwrap()).unwrap();
        let config = NnmfSgdConfig {
            n_factors: Some(3),
            max_iters: 150,
            seed,
            ..Default::default()
        };
        let a = NnmfModel::fit_sgd(&train, &config).unwrap();
        prop_assert!(a.stats.final_rmse <= a.stats.rmse_history[0]);
        prop_assert!(a.min_factor_entry() >= 0.0);

        let b = NnmfModel::fit_sgd(&train, &config).unwrap();
        prop_assert_eq!(&a.user_factors, &b.user_factors);
        prop_assert_eq!(&a.item_factors, &b.item_factors);
        prop_assert_eq!(&a.user_bias, &b.user_bias);
        prop_assert_eq!(&a.item_bias, &b.item_bias);
    }
}

// ---------------------------------------------------------------------------
// Dilation
// ---------------------------------------------------------------------------

proptest! {
    /// Dilation reads only observed values: perturbing the masked-out truth
    /// cannot change the dilated training view.
    #[test]
    fn dilation_no_leakage(seed in 0u64..500, width in 1u32..30, junk in -1000.0..1000.0f64) {
        let m = sinusoid_panel(4, 80, 40.0, 100 + seed);
        let mask = m.mask_random(0.7, seed).unwrap();
        let kernel = DilationKernel::boxcar(width, 1.0);
        let a = dilate(&m.apply_mask(&mask).unwrap(), &kernel).unwrap();

        let mut grid = m.grid().clone();
        for (u, i) in mask.masked_cells() {
            grid[[u, i]] = junk;
        }
        let perturbed = RatingsMatrix::from_grid(
            grid,
            m.user_labels().to_vec(),
            m.item_labels().to_vec(),
            (-2000.0, 2000.0),
        ).unwrap();
        let b = dilate(&perturbed.apply_mask(&mask).unwrap(), &kernel).unwrap();
        prop_assert!(
            a.matrix.grid().iter().zip(b.matrix.grid().iter())
                .all(|(x, y)| x.to_bits() == y.to_bits())
        );
    }

    /// Dense rows pass through unchanged; width-1 boxcar is the identity;
    /// observation counts never decrease.
    #[test]
    fn dilation_structural_invariants(grid in grid_strategy(4, 30), seed in 0u64..500, width in 1u32..20) {
        let dense = matrix_from(grid);
        let out = dilate(&dense, &DilationKernel::boxcar(width, 1.0)).unwrap();
        prop_assert!(out.matrix.bit_eq(&dense));

        let sparse = dense.apply_mask(&dense.mask_random(0.6, seed).unwrap()).unwrap();
        let one = dilate(&sparse, &DilationKernel::boxcar(1, 1.0)).unwrap();
        prop_assert!(one.matrix.bit_eq(&sparse));

        let wide = dilate(&sparse, &DilationKernel::boxcar(width, 1.0)).unwrap();
        prop_assert!(wide.matrix.n_observed() >= sparse.n_observed());
    }

    /// Pseudo-observations on a constant row equal the constant exactly.
    #[test]
    fn dilation_constant_row(seed in 0u64..500, width in 2u32..20, c in 1.0..99.0f64) {
        let grid = Array2::from_elem((2, 40), c);
        let m = matrix_from(grid);
        let sparse = m.apply_mask(&m.mask_random(0.8, seed).unwrap()).unwrap();
        let out = dilate(&sparse, &DilationKernel::boxcar(width, 1.0)).unwrap();
        for u in 0..2 {
            for t in 0..40 {
                if let Some(v) = out.matrix.get(u, t) {
                    prop_assert_eq!(v, c);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

proptest! {
    /// Train and test cells are disjoint and jointly cover the eligible set.
    #[test]
    fn mask_partitions_eligible_cells(grid in grid_strategy(8, 8), tenth in 1usize..=9, seed in 0u64..500) {
        let m = matrix_from(grid);
        let mask = m.mask_random(tenth as f64 / 10.0, seed).unwrap();
        let train = m.apply_mask(&mask).unwrap();
        let test = mask.masked_cells();
        for c in &test {
            prop_assert!(!train.is_observed(c.0, c.1));
        }
        prop_assert_eq!(test.len() + train.n_observed(), m.n_observed());
    }

    /// Normalized error is invariant when ratings, predictions, and scale
    /// bounds undergo the same positive affine transform.
    #[test]
    fn normalized_error_affine_invariance(
        grid in grid_strategy(5, 6),
        a in 0.1..10.0f64,
        b in -50.0..50.0f64,
    ) {
        let m = matrix_from(grid.clone());
        let pred = PredictionMatrix::from_grid(grid.mapv(|v| (v * 0.9) + 3.0));
        let cells: Vec<(usize, usize)> = m.observed_cells();
        let r1 = rmse(&pred, &m, &cells).unwrap();
        let n1 = normalized_error(r1, 0.0, 100.0).unwrap();

        let m2 = matrix_from_affine(&m, a, b);
        let pred2 = PredictionMatrix::from_grid(pred.values().mapv(|v| a * v + b));
        let r2 = rmse(&pred2, &m2, &cells).unwrap();
        let n2 = normalized_error(r2, a * 0.0 + b, a * 100.0 + b).unwrap();
        prop_assert!((n1 - n2).abs() < 1e-9, "{} vs {}", n1, n2);
    }
}

fn matrix_from_affine(m: &RatingsMatrix, a: f64, b: f64) -> RatingsMatrix {
    RatingsMatrix::from_grid(
        m.grid().mapv(|v| a * v + b),
        m.user_labels().to_vec(),
        m.item_labels().to_vec(),
        (a * 0.0 + b, a * 100.0 + b),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// The report's grand mean equals the reference double loop (users,
    /// then iterations), and identical plans yield identical reports.
    #[test]
    fn aggregation_identity_and_determinism(seed in 0u64..100) {
        let m = random_dense(6, 8, 40.0, 11_000 + seed);
        let plan = ExperimentPlan {
            sparsity_levels: vec![0.3, 0.6],
            n_iterations: 2,
            estimators: vec![PlannedEstimator::new("mean", EstimatorConfig::Mean)],
            base_seed: seed,
            jobs: 1,
            ..Default::default()
        };
        let report = run_experiment(&m, &plan).unwrap();
        let report2 = run_experiment(&m, &plan).unwrap();
        prop_assert_eq!(&report, &report2);

        for &s in &[0.3, 0.6] {
            let grand = report.grand_mean("mean", s).unwrap();
            let mut user_means = Vec::new();
            for label in m.user_labels() {
                let vals: Vec<f64> = report.records.iter()
                    .filter(|r| r.sparsity == s && &r.user == label)
                    .map(|r| r.normalized_error)
                    .collect();
                if !vals.is_empty() {
                    user_means.push(vals.iter().sum::<f64>() / vals.len() as f64);
                }
            }
            let reference = user_means.iter().sum::<f64>() / user_means.len() as f64;
            prop_assert!((grand - reference).abs() < 1e-15);
        }
    }

    /// Masks at the same sparsity are pairwise distinct across iterations on
    /// matrices with at least 100 cells.
    #[test]
    fn iteration_masks_differ(base_seed in 0u64..100) {
        let m = random_dense(10, 10, 10.0, 13_000 + base_seed);
        let masks: Vec<_> = (0..4)
            .map(|it| {
                m.mask_random(0.5, corate::seed::mask_seed(base_seed, 0.5, it)).unwrap()
            })
            .collect();
        for i in 0..masks.len() {
            for j in (i + 1)..masks.len() {
                prop_assert!(!masks[i].same_cells(&masks[j]));
            }
        }
    }
}

/// Group means recombine to the grand mean, weighted by group size.
#[test]
fn stratified_means_recombine() {
    let m = random_dense(8, 10, 60.0, 15_000);
    let plan = ExperimentPlan {
        sparsity_levels: vec![0.5],
        n_iterations: 3,
        estimators: vec![PlannedEstimator::new("mean", EstimatorConfig::Mean)],
        base_seed: 21,
        jobs: 1,
        ..Default::default()
    };
    let report = run_experiment(&m, &plan).unwrap();
    let labels: HashMap<String, String> = m
        .user_labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), format!("g{}", i % 3)))
        .collect();
    let rows = corate::stratify_report(&report, &labels).unwrap();
    let weighted: f64 = rows
        .iter()
        .map(|r| r.normalized_error * r.n_users as f64)
        .sum::<f64>()
        / rows.iter().map(|r| r.n_users as f64).sum::<f64>();
    let grand = report.grand_mean("mean", 0.5).unwrap();
    assert!((weighted - grand).abs() < 1e-12);
}
