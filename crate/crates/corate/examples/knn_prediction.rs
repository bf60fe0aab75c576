//! User-based KNN: predictions are similarity-weighted averages over the
//! most similar users who rated the target item, with a mean-model fallback
//! cascade when no usable neighbor exists.
//!
//! ```bash
//! cargo run -p corate --example knn_prediction
//! ```

use corate::{KnnModel, Metric, RatingRecord, RatingsMatrix};

fn main() -> corate::Result<()> {
    // Two taste camps: {ana, ben, cam} like the first items, {dee, eli}
    // the last ones. fay has rated almost nothing.
    let ratings: &[(&str, &[f64])] = &[
        ("ana", &[5.0, 4.5, 4.0, 1.0, 0.5, f64::NAN]),
        ("ben", &[4.5, 5.0, 4.0, 0.5, 1.0, 1.5]),
        ("cam", &[4.0, 4.0, f64::NAN, 1.5, 0.5, 1.0]),
        ("dee", &[1.0, 0.5, 1.5, 4.5, 5.0, 4.0]),
        ("eli", &[0.5, 1.0, 1.0, 5.0, 4.5, f64::NAN]),
        ("fay", &[3.0, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN]),
    ];
    let mut records = Vec::new();
    for (user, row) in ratings {
        for (i, v) in row.iter().enumerate() {
            if !v.is_nan() {
                records.push(RatingRecord::new(*user, format!("i{i}"), *v));
            }
        }
    }
    let matrix = RatingsMatrix::from_records(&records, Some((0.0, 5.0)))?;

    let model = KnnModel::fit(&matrix, 10, Metric::Pearson, 2)?;

    // ana's missing rating for i5 comes from her camp.
    let ana = matrix.user_index("ana").unwrap();
    println!("ana's prediction for i5: {:.3}", model.predict_cell(ana, 5));

    // fay has one rating: nobody reaches the overlap threshold, so her
    // predictions fall back to item means.
    let fay = matrix.user_index("fay").unwrap();
    println!("fay's prediction for i5: {:.3} (item-mean fallback)", model.predict_cell(fay, 5));

    // Neighbors must have strictly positive similarity: the camps never
    // borrow from each other even with k = 10.
    let dee = matrix.user_index("dee").unwrap();
    println!("dee's prediction for i0: {:.3}", model.predict_cell(dee, 0));

    println!("\nfull completion:");
    let pred = model.predict();
    for (u, user) in matrix.user_labels().iter().enumerate() {
        let row: Vec<String> = (0..matrix.n_items())
            .map(|i| {
                let marker = if matrix.is_observed(u, i) { ' ' } else { '*' };
                format!("{:5.2}{marker}", pred.get(u, i))
            })
            .collect();
        println!("  {user:>4}: {}", row.join(""));
    }
    println!("  (* = previously missing)");
    Ok(())
}
