//! Train the biased non-negative factorization with stochastic gradient
//! descent on a masked low-rank matrix, watch the convergence trace, and
//! round-trip the fitted model through its JSON form.
//!
//! ```bash
//! cargo run -p corate --example nnmf_sgd_training
//! ```

use corate::{NnmfModel, NnmfSgdConfig, RatingsMatrix};
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> corate::Result<()> {
    // Ground truth with rank 2: two user archetypes mixed per user.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let user_mix = Array2::from_shape_fn((15, 2), |_| rng.random::<f64>());
    let item_profiles = Array2::from_shape_fn((2, 25), |_| 10.0 * rng.random::<f64>());
    let truth = user_mix.dot(&item_profiles);
    let hi = truth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let matrix = RatingsMatrix::from_grid(
        truth.clone(),
        (0..15).map(|u| format!("u{u:02}")).collect(),
        (0..25).map(|i| i.to_string()).collect(),
        (0.0, hi + 1.0),
    )?;

    // Hide 60% of the cells and fit on the rest.
    let mask = matrix.mask_random(0.6, 42)?;
    let train = matrix.apply_mask(&mask)?;
    let config = NnmfSgdConfig {
        n_factors: Some(2),
        learning_rate: 0.005,
        max_iters: 2000,
        seed: 9,
        ..Default::default()
    };
    let model = NnmfModel::fit_sgd(&train, &config)?;

    println!(
        "stopped after {} iterations (converged: {}), training rmse {:.5}",
        model.stats.iterations, model.stats.converged, model.stats.final_rmse
    );
    print!("rmse trace:");
    for (i, r) in model.stats.rmse_history.iter().enumerate() {
        if i % 200 == 0 {
            print!(" {r:.4}");
        }
    }
    println!();

    // Factors stay non-negative throughout training.
    println!("smallest factor entry: {:.6}", model.min_factor_entry());

    // Score the held-out cells against the hidden truth.
    let pred = model.predict();
    let cells = mask.masked_cells();
    let mut sq = 0.0;
    for &(u, i) in &cells {
        let e = truth[[u, i]] - pred.get(u, i);
        sq += e * e;
    }
    let rmse = (sq / cells.len() as f64).sqrt();
    println!(
        "held-out rmse {rmse:.4} ({:.2}% of the scale range)",
        100.0 * rmse / matrix.scale_range()
    );

    // The JSON form carries parameters, hyperparameters, and convergence
    // metadata; reloading reproduces the model bit for bit.
    let json = model.to_json()?;
    let reloaded = NnmfModel::from_json(&json)?;
    assert_eq!(model.user_factors, reloaded.user_factors);
    println!("serialized model: {} bytes of JSON, round-trips exactly", json.len());
    Ok(())
}
