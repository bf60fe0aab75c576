//! Build a ratings matrix from tidy records, hide part of it with a seeded
//! random mask, and inspect the train/test split.
//!
//! ```bash
//! cargo run -p corate --example ingest_and_mask
//! ```

use corate::{RatingRecord, RatingsMatrix};

fn main() -> corate::Result<()> {
    // One row per observed rating; (user, item) pairs absent from the list
    // become missing cells.
    let records = vec![
        RatingRecord::new("ana", "film-a", 4.0),
        RatingRecord::new("ana", "film-b", 1.5),
        RatingRecord::new("ana", "film-c", 3.0),
        RatingRecord::new("ben", "film-a", 4.5),
        RatingRecord::new("ben", "film-b", 1.0),
        RatingRecord::new("cam", "film-b", 2.0),
        RatingRecord::new("cam", "film-c", 5.0),
    ];
    let matrix = RatingsMatrix::from_records(&records, Some((0.0, 5.0)))?;
    println!(
        "{} users x {} items, {} observed / {} missing",
        matrix.n_users(),
        matrix.n_items(),
        matrix.n_observed(),
        matrix.n_missing()
    );
    for (u, user) in matrix.user_labels().iter().enumerate() {
        let row: Vec<String> = (0..matrix.n_items())
            .map(|i| match matrix.get(u, i) {
                Some(v) => format!("{v:4.1}"),
                None => "   .".to_string(),
            })
            .collect();
        println!("  {user}: {}", row.join(" "));
    }

    // Hide 40% of the observed cells. The count is exact and the draw is
    // deterministic for a fixed seed.
    let mask = matrix.mask_random(0.4, 7)?;
    println!(
        "\nmasked {} of {} eligible cells (seed {})",
        mask.n_masked(),
        matrix.n_observed(),
        mask.seed()
    );

    let train = matrix.apply_mask(&mask)?;
    println!("training view now has {} observed cells:", train.n_observed());
    for (u, user) in train.user_labels().iter().enumerate() {
        let row: Vec<String> = (0..train.n_items())
            .map(|i| match train.get(u, i) {
                Some(v) => format!("{v:4.1}"),
                None => "   .".to_string(),
            })
            .collect();
        println!("  {user}: {}", row.join(" "));
    }

    // The held-out cells are the test set; the original matrix keeps the
    // truth for scoring.
    println!("\ntest cells: {:?}", mask.masked_cells());
    Ok(())
}
