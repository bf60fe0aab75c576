//! Compare the four user-user similarity metrics on a small matrix with
//! partial overlap between users.
//!
//! ```bash
//! cargo run -p corate --example similarity_metrics
//! ```

use corate::{compute_similarity, Metric, RatingRecord, RatingsMatrix};

fn main() -> corate::Result<()> {
    // dora tracks ana; ben is ana reversed; cam shares too little with
    // anyone for a defined similarity (min_overlap = 2).
    let mut records = Vec::new();
    let rows: &[(&str, &[(usize, f64)])] = &[
        ("ana", &[(0, 1.0), (1, 2.0), (2, 3.0), (3, 4.0)]),
        ("ben", &[(0, 4.0), (1, 3.0), (2, 2.0), (3, 1.0)]),
        ("cam", &[(4, 2.5)]),
        ("dora", &[(0, 2.0), (1, 4.0), (2, 6.0), (3, 8.0)]),
    ];
    for (user, ratings) in rows {
        for (item, value) in ratings.iter() {
            records.push(RatingRecord::new(*user, format!("i{item}"), *value));
        }
    }
    let matrix = RatingsMatrix::from_records(&records, Some((0.0, 10.0)))?;

    for metric in [Metric::Pearson, Metric::Cosine, Metric::Spearman, Metric::Kendall] {
        let sim = compute_similarity(&matrix, metric, 2);
        println!("{}:", metric.name());
        print!("{:>8}", "");
        for label in matrix.user_labels() {
            print!("{label:>8}");
        }
        println!();
        for (u, label) in matrix.user_labels().iter().enumerate() {
            print!("{label:>8}");
            for v in 0..matrix.n_users() {
                match sim.get(u, v) {
                    Some(s) => print!("{s:>8.3}"),
                    // Undefined is not zero: these pairs carry no
                    // information at all.
                    None => print!("{:>8}", "-"),
                }
            }
            println!();
        }
        println!();
    }
    Ok(())
}
