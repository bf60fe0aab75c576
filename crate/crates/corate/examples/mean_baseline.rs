//! The baseline estimator: every missing cell gets its item's observed mean,
//! and items nobody rated fall back to the global mean.
//!
//! ```bash
//! cargo run -p corate --example mean_baseline
//! ```

use corate::{MeanModel, RatingRecord, RatingsMatrix};

fn main() -> corate::Result<()> {
    let records = vec![
        RatingRecord::new("ana", "i0", 2.0),
        RatingRecord::new("ben", "i0", 4.0),
        RatingRecord::new("ana", "i1", 5.0),
        // item i2 exists in the full design but nobody rated it after
        // masking; it is simply absent here.
    ];
    let matrix = RatingsMatrix::from_records(&records, Some((0.0, 5.0)))?;
    let model = MeanModel::fit(&matrix)?;

    println!("global mean: {}", model.global_mean());
    for (i, label) in matrix.item_labels().iter().enumerate() {
        println!(
            "item {label}: mean = {:?} -> prediction {}",
            model.item_mean(i),
            model.predict_item(i)
        );
    }

    // Predictions are per-item constants across users.
    let pred = model.predict();
    println!("\nprediction grid:");
    for u in 0..matrix.n_users() {
        let row: Vec<String> = (0..matrix.n_items())
            .map(|i| format!("{:4.2}", pred.get(u, i)))
            .collect();
        println!("  {}: {}", matrix.user_labels()[u], row.join(" "));
    }
    Ok(())
}
