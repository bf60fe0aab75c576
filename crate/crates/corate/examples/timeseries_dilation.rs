//! Kernel dilation of sparse time series: each observed rating spreads into
//! nearby missing timepoints, densifying the training view without touching
//! any held-out value.
//!
//! ```bash
//! cargo run -p corate --example timeseries_dilation
//! ```

use corate::{dilate, DilationKernel, RatingsMatrix};
use ndarray::Array2;

fn render(m: &RatingsMatrix, pseudo: Option<&ndarray::Array2<bool>>) {
    for u in 0..m.n_users() {
        let row: Vec<String> = (0..m.n_items())
            .map(|t| match m.get(u, t) {
                Some(v) => {
                    let mark = pseudo
                        .map(|p| if p[[u, t]] { '~' } else { ' ' })
                        .unwrap_or(' ');
                    format!("{v:5.1}{mark}")
                }
                None => "    . ".to_string(),
            })
            .collect();
        println!("  {}", row.join(""));
    }
}

fn main() -> corate::Result<()> {
    // A 1 Hz trace sampled sparsely: item labels are second offsets.
    let n = 16;
    let mut grid = Array2::from_elem((1, n), f64::NAN);
    for (t, v) in [(2usize, 30.0), (3, 34.0), (9, 70.0), (14, 50.0)] {
        grid[[0, t]] = v;
    }
    let sparse = RatingsMatrix::from_grid(
        grid,
        vec!["ana".into()],
        (0..n).map(|t| t.to_string()).collect(),
        (0.0, 100.0),
    )?;

    println!("sparse trace ({} of {} timepoints):", sparse.n_observed(), n);
    render(&sparse, None);

    for (label, kernel) in [
        ("boxcar 5 s", DilationKernel::boxcar(5, 1.0)),
        ("boxcar 9 s", DilationKernel::boxcar(9, 1.0)),
        ("gaussian 9 s", DilationKernel::gaussian(9, 1.0)),
    ] {
        let out = dilate(&sparse, &kernel)?;
        println!(
            "\nafter {label} dilation ({} pseudo-observations, ~ marks them):",
            out.n_pseudo()
        );
        render(&out.matrix, Some(&out.pseudo));
    }

    println!("\noriginal observations are never overwritten, and timepoints");
    println!("outside every window stay missing.");
    Ok(())
}
